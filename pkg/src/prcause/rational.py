"""Exact rational values.

All probabilities and measures in this package are `fractions.Fraction`
instances.  Ratio and expectation queries can additionally yield the
distinguished value `POS_INF`; it never appears inside transition
probabilities.
"""

from fractions import Fraction

from .errors import ModelError


class _PosInf:
    """The single +infinity value returned by ratio/expectation queries.

    Supports the comparisons and the little arithmetic the formulas need
    (adding a finite value, dividing a finite value by it).
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "PosInf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("PosInf")

    # ordering: strictly above every rational
    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        _require_finite_or_inf(other)
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other is self:
            return self
        _require_finite_or_inf(other)
        if other <= 0:
            raise ValueError("PosInf * nonpositive is undefined here")
        return self

    __rmul__ = __mul__

    def __rtruediv__(self, other):
        # finite / PosInf  ->  0
        _require_finite(other)
        return Fraction(0)


POS_INF = _PosInf()


def _require_finite(value):
    if not isinstance(value, (Fraction, int)):
        raise TypeError("expected an exact rational, got %r" % (value,))


def _require_finite_or_inf(value):
    if value is POS_INF:
        return
    _require_finite(value)


def is_finite(value):
    return value is not POS_INF


def parse_fraction(text, where=""):
    """Parse 'p/q' or an integer literal into a Fraction.

    Decimal notation is rejected: silently converting '0.1' would smuggle
    a rounding step into an exact pipeline.
    """
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ModelError(
            "decimal probability %r rejected%s; write an exact fraction p/q"
            % (text, " at " + where if where else "")
        )
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            value = Fraction(int(num), int(den))
        else:
            value = Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(
            "cannot parse probability %r%s: %s"
            % (text, " at " + where if where else "", exc)
        ) from None
    return value


def format_fraction(value):
    if value is POS_INF:
        return "inf"
    if value.denominator == 1:
        return str(value.numerator)
    return "%d/%d" % (value.numerator, value.denominator)
