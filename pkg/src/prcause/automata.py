"""Deterministic automata over MDP state names: Rabin automata for
long-run effects and DFAs for sets of finite words (good prefixes).

The alphabet is implicit (the symbols mentioned on edges); totality
against a concrete model's state set is checked when a product is
built.
"""

import re

from .errors import ContractError, ModelError


class Dra:
    """Deterministic Rabin automaton.  Acceptance: some pair (L, K)
    with L visited finitely often and K infinitely often."""

    def __init__(self, states, q0, delta, pairs):
        self.states = tuple(states)
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate automaton state")
        if q0 not in self.states:
            raise ModelError("initial automaton state %r not declared" % (q0,))
        self.q0 = q0
        self.delta = dict(delta)
        for (q, sym), r in self.delta.items():
            if q not in self.states or r not in self.states:
                raise ModelError("edge %r --%r--> %r uses undeclared state"
                                 % (q, sym, r))
        self.pairs = [(frozenset(l), frozenset(k)) for l, k in pairs]
        for l, k in self.pairs:
            for q in l | k:
                if q not in self.states:
                    raise ModelError("acceptance pair mentions undeclared "
                                     "state %r" % (q,))

    def step(self, q, sym):
        try:
            return self.delta[(q, sym)]
        except KeyError:
            raise ContractError(
                "automaton alphabet mismatch: no edge from %r on %r"
                % (q, sym))

    def symbols(self):
        return {sym for (_, sym) in self.delta}


class Dfa:
    """Deterministic finite automaton over MDP state names."""

    def __init__(self, states, q0, delta, accepting):
        self.states = tuple(states)
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate automaton state")
        if q0 not in self.states:
            raise ModelError("initial automaton state %r not declared" % (q0,))
        self.q0 = q0
        self.delta = dict(delta)
        for (q, sym), r in self.delta.items():
            if q not in self.states or r not in self.states:
                raise ModelError("edge %r --%r--> %r uses undeclared state"
                                 % (q, sym, r))
        self.accepting = frozenset(accepting)
        for q in self.accepting:
            if q not in self.states:
                raise ModelError("accepting set mentions undeclared state %r"
                                 % (q,))

    def step(self, q, sym):
        try:
            return self.delta[(q, sym)]
        except KeyError:
            raise ContractError(
                "automaton alphabet mismatch: no edge from %r on %r"
                % (q, sym))

    def is_prefix_free(self):
        """No accepting state reaches an accepting state in >= 1 steps;
        the accepted language then contains no word extending another."""
        succ = {}
        for (q, _), r in self.delta.items():
            succ.setdefault(q, set()).add(r)
        for start in self.accepting:
            seen = set()
            stack = list(succ.get(start, ()))
            while stack:
                q = stack.pop()
                if q in seen:
                    continue
                seen.add(q)
                if q in self.accepting:
                    return False
                stack.extend(succ.get(q, ()))
        return True


# -- file formats ----------------------------------------------------------


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line


_PAIR_RE = re.compile(r"^L=\{([^{}]*)\}K=\{([^{}]*)\}$")
_SET_RE = re.compile(r"^\{([^{}]*)\}$")


def _split_names(blob):
    return [n for n in blob.split(",") if n]


def _parse_automaton(text, expect):
    header = None
    order = []
    q0 = None
    delta = {}
    pairs = []
    accepting = set()
    for lineno, line in _lines(text):
        where = "line %d" % lineno
        toks = line.split()
        if header is None:
            if len(toks) == 1 and toks[0] == expect:
                header = toks[0]
                continue
            raise ModelError("%s: expected header %r" % (where, expect))
        if toks[0] == "state":
            if len(toks) < 2 or len(toks) > 3:
                raise ModelError("%s: state line needs 'state NAME [init]'"
                                 % where)
            name = toks[1]
            if name in order:
                raise ModelError("%s: duplicate state %r" % (where, name))
            if len(toks) == 3:
                if toks[2] != "init":
                    raise ModelError("%s: unknown marker %r" % (where, toks[2]))
                if q0 is not None:
                    raise ModelError("%s: second initial state" % where)
                q0 = name
            order.append(name)
        elif toks[0] == "edge":
            if len(toks) != 4:
                raise ModelError("%s: edge line needs 'edge FROM SYMBOL TO'"
                                 % where)
            frm, sym, to = toks[1:]
            if (frm, sym) in delta:
                raise ModelError("%s: duplicate edge from %r on %r"
                                 % (where, frm, sym))
            delta[(frm, sym)] = to
        elif toks[0] == "pair" and expect == "dra":
            blob = "".join(toks[1:])
            match = _PAIR_RE.match(blob)
            if not match:
                raise ModelError("%s: pair line needs 'pair L={..} K={..}'"
                                 % where)
            pairs.append((_split_names(match.group(1)),
                          _split_names(match.group(2))))
        elif toks[0] == "accepting" and expect == "dfa":
            blob = "".join(toks[1:])
            match = _SET_RE.match(blob)
            if not match:
                raise ModelError("%s: accepting line needs 'accepting {..}'"
                                 % where)
            accepting.update(_split_names(match.group(1)))
        else:
            raise ModelError("%s: unknown directive %r" % (where, toks[0]))
    if header is None:
        raise ModelError("empty automaton: missing %r header" % expect)
    if q0 is None:
        raise ModelError("no automaton state marked 'init'")
    if expect == "dra":
        return Dra(order, q0, delta, pairs)
    return Dfa(order, q0, delta, accepting)


def parse_dra(text):
    return _parse_automaton(text, "dra")


def parse_dfa(text):
    return _parse_automaton(text, "dfa")


def serialize_dra(a):
    lines = ["dra"]
    for q in a.states:
        lines.append("state %s%s" % (q, " init" if q == a.q0 else ""))
    for (q, sym), r in sorted(a.delta.items(), key=lambda kv: (
            a.states.index(kv[0][0]), str(kv[0][1]))):
        lines.append("edge %s %s %s" % (q, sym, r))
    for l, k in a.pairs:
        lines.append("pair L={%s} K={%s}"
                     % (",".join(sorted(l)), ",".join(sorted(k))))
    return "\n".join(lines) + "\n"


def serialize_dfa(a):
    lines = ["dfa"]
    for q in a.states:
        lines.append("state %s%s" % (q, " init" if q == a.q0 else ""))
    for (q, sym), r in sorted(a.delta.items(), key=lambda kv: (
            a.states.index(kv[0][0]), str(kv[0][1]))):
        lines.append("edge %s %s %s" % (q, sym, r))
    lines.append("accepting {%s}" % ",".join(sorted(a.accepting)))
    return "\n".join(lines) + "\n"
