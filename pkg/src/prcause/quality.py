"""Cause quality: confusion matrix under a fixed scheduler and
worst-case recall, coverage ratio, and f-score of a fixed cause.

Worst-case measures run on the canonical form, where they reduce to
extremal expected-visit queries on a reset model; the optimizing MD
scheduler of that solve is handed back as the witness.  Conventions
for degenerate cases are centralized here: no scheduler can produce an
uncovered effect => covratio is infinite and recall is 1; the visit
ratio behind the f-score is infinite => f-score 0.
"""

import math
from fractions import Fraction

from .checking import CauseQuery, check_gpr
from .errors import ContractError
from .model import Mdp, induced_chain
from .rational import POS_INF
from .reach import (chain_reach_values, first_hit_distribution,
                    max_reach_prob, min_reach_prob)
from .transforms import canonical_form
from .weight import ratio_reset_model, ssp_expected_weight

ZERO = Fraction(0)
ONE = Fraction(1)
TWO = Fraction(2)


class ConfusionMatrix:
    """Joint probabilities of the four reach-cause / reach-effect
    combinations under one scheduler.  The events partition the run
    space, so the entries always sum to one."""

    def __init__(self, tp, fp, fn, tn):
        self.tp = tp
        self.fp = fp
        self.fn = fn
        self.tn = tn

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn)

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}

    def __repr__(self):
        return "ConfusionMatrix(tp=%s, fp=%s, fn=%s, tn=%s)" % (
            self.tp, self.fp, self.fn, self.tn)


class ResetWitness:
    """Worst-case scheduler for a ratio measure, in the coordinates of
    the reset model it was solved on.

    `state_map` translates original states to the canonical form the
    reset model copies, so the choice can be read back on the input.
    """

    def __init__(self, measure, ratio, reset_model, scheduler, canonical,
                 state_map):
        self.measure = measure
        self.ratio = ratio
        self.reset_model = reset_model
        self.scheduler = scheduler
        self.canonical = canonical
        self.state_map = state_map

    def __repr__(self):
        return "ResetWitness(measure=%r, ratio=%s)" % (
            self.measure, self.ratio)


class SubModelWitness:
    """Cause-avoiding scheduler that still reaches the effect; its
    existence forces recall, coverage ratio, and f-score to zero."""

    def __init__(self, model, scheduler, canonical, state_map):
        self.model = model
        self.scheduler = scheduler
        self.canonical = canonical
        self.state_map = state_map

    def __repr__(self):
        return "SubModelWitness(%r)" % (self.scheduler,)


class QualityReport:
    """Bundle of the three worst-case measures with their witnesses."""

    def __init__(self, recall, covratio, fscore, witnesses):
        self.recall = recall
        self.covratio = covratio
        self.fscore = fscore
        self.witnesses = dict(witnesses)

    def __repr__(self):
        return "QualityReport(recall=%s, covratio=%s, fscore=%s)" % (
            self.recall, self.covratio, self.fscore)


def confusion_matrix(m, cause, eff, s):
    """Exact confusion entries of `cause` against terminal `eff` under
    the fixed scheduler `s`."""
    cause = set(cause)
    eff = set(eff)
    if not eff:
        raise ContractError("empty effect set")
    for t in eff:
        if not m.has_state(t):
            raise ContractError("unknown effect state %r" % (t,))
        if not m.is_terminal(t):
            raise ContractError("effect state %r is not terminal" % (t,))
    chain = induced_chain(m, s)
    veff = chain_reach_values(
        chain, {cs for cs in chain.states if cs[1] in eff})
    mu = first_hit_distribution(
        chain, {cs for cs in chain.states if cs[1] in cause})
    p_eff = veff[chain.init]
    p_cause = sum(mu.values(), ZERO)
    tp = sum((w * veff[c] for c, w in mu.items()), ZERO)
    fp = p_cause - tp
    fn = p_eff - tp
    return ConfusionMatrix(tp, fp, fn, ONE - tp - fp - fn)


def _checked_canonical(m, cause, eff, assume_cause):
    if not assume_cause:
        verdict = check_gpr(CauseQuery(m, cause, eff, "gpr", "strict"))
        if not verdict:
            raise ContractError(
                "quality measures are defined for probability-raising "
                "causes only; %s is not one" % (sorted(cause),))
    return canonical_form(m, cause, eff)


def recall_covratio(m, cause, eff, assume_cause=False):
    """Worst-case recall and coverage ratio of a cause.

    Recall follows from the ratio algebraically; both are minimized by
    the same scheduler, returned as the witness.
    """
    canon, smap = _checked_canonical(m, cause, eff, assume_cause)
    return recall_covratio_canonical(canon, smap)


def recall_covratio_canonical(canon, smap=None):
    n = canon.mdp
    if max_reach_prob(n, {canon.eff_unc})[0][n.init] == 0:
        return ONE, POS_INF, None
    reset = ratio_reset_model(n, {canon.eff_cov}, {canon.eff_unc})
    cov, sched = ssp_expected_weight(
        reset, {canon.eff_cov: ONE}, {canon.eff_unc}, "min")
    recall = cov / (ONE + cov)
    witness = ResetWitness("covratio", cov, reset, sched, canon, smap)
    return recall, cov, witness


def fscore(m, cause, eff, assume_cause=False):
    """Worst-case f-score of a cause.

    A scheduler that reaches the effect while avoiding the cause forces
    the value to zero and is reported directly; otherwise the score is
    2/(X+2) for the maximal false-to-true visit ratio X.
    """
    canon, smap = _checked_canonical(m, cause, eff, assume_cause)
    return fscore_canonical(canon, smap)


def fscore_canonical(canon, smap=None):
    zero = _cause_avoiding_eff(canon, smap)
    if zero is not None:
        return ZERO, zero
    n = canon.mdp
    upper = {canon.noeff_fp, canon.eff_unc}
    reset = ratio_reset_model(n, upper, {canon.eff_cov})
    x, sched = ssp_expected_weight(
        reset, {u: ONE for u in upper}, {canon.eff_cov}, "max")
    if x is POS_INF:
        return ZERO, None
    witness = ResetWitness("fscore", x, reset, sched, canon, smap)
    return TWO / (x + TWO), witness


def _cause_avoiding_eff(canon, smap):
    # a scheduler keeps Pr(cause) = 0 exactly when it never leaves the
    # region where the minimal cause-reach probability is zero
    n = canon.mdp
    zero_region = {s for s, v in
                   min_reach_prob(n, set(canon.cause))[0].items() if v == 0}
    if n.init not in zero_region:
        return None
    trans = {}
    for s in zero_region:
        if n.is_terminal(s):
            continue
        row = {}
        for a in n.actions(s):
            if all(t in zero_region for t in n.dist(s, a)):
                row[a] = dict(n.dist(s, a))
        if row:
            trans[s] = row
    states = [s for s in n.states if s in zero_region]
    sub = Mdp(states, n.init, trans, allow_unreachable=True)
    vals, sched = max_reach_prob(sub, {canon.eff_cov, canon.eff_unc})
    if vals[sub.init] == 0:
        return None
    return SubModelWitness(sub, sched, canon, smap)


def quality_report(m, cause, eff, assume_cause=False):
    """All three worst-case measures off one canonical form."""
    canon, smap = _checked_canonical(m, cause, eff, assume_cause)
    recall, cov, wit_cov = recall_covratio_canonical(canon, smap)
    f, wit_f = fscore_canonical(canon, smap)
    return QualityReport(recall, cov, f, {"covratio": wit_cov,
                                          "recall": wit_cov,
                                          "fscore": wit_f})


class Surd(object):
    """Exact value numerator*sqrt(radicand)/denominator with a decimal
    rendering for display; used when an MCC is irrational."""

    def __init__(self, numerator, radicand, denominator):
        if denominator <= 0 or radicand <= 0:
            raise ContractError("malformed surd")
        self.numerator = numerator
        self.radicand = radicand
        self.denominator = denominator

    def __float__(self):
        return self.numerator * math.sqrt(self.radicand) / self.denominator

    def __eq__(self, other):
        if not isinstance(other, Surd):
            return NotImplemented
        return (self.numerator, self.radicand, self.denominator) == (
            other.numerator, other.radicand, other.denominator)

    def __hash__(self):
        return hash((self.numerator, self.radicand, self.denominator))

    def decimal(self):
        return "%.17g" % float(self)

    def __repr__(self):
        return "Surd(%d, %d, %d)" % (
            self.numerator, self.radicand, self.denominator)

    def __str__(self):
        return "%d*sqrt(%d)/%d" % (
            self.numerator, self.radicand, self.denominator)


def _square_split(n):
    # n = k*k*d; pulls square factors with small primes only, which is
    # enough to normalize the denominators probabilities produce
    k, d, f = 1, n, 2
    while f * f <= d and f <= 10000:
        ff = f * f
        while d % ff == 0:
            d //= ff
            k *= f
        f += 1
    return k, d


def mcc_under(s, m, cause, eff):
    """Matthews correlation coefficient of `cause` under scheduler `s`.

    Exact: a Fraction when the radicand is a perfect rational square,
    otherwise a Surd.  Undefined when a marginal is zero.
    """
    cm = confusion_matrix(m, cause, eff, s)
    factors = {
        "tp+fp": cm.tp + cm.fp,
        "tp+fn": cm.tp + cm.fn,
        "tn+fp": cm.tn + cm.fp,
        "tn+fn": cm.tn + cm.fn,
    }
    for name, f in factors.items():
        if f == 0:
            raise ContractError(
                "MCC undefined: marginal %s is zero" % (name,))
    num = cm.tp * cm.tn - cm.fp * cm.fn
    rad = ONE
    for f in factors.values():
        rad *= f
    p, q = rad.numerator, rad.denominator
    pq = p * q
    root = math.isqrt(pq)
    if root * root == pq:
        return num * q / root
    if num == 0:
        return ZERO
    k, d = _square_split(pq)
    scale = num * q / (k * d)
    return Surd(scale.numerator, d, scale.denominator)
