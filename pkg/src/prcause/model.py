"""Core model types: exact-rational MDPs, schedulers, induced chains,
and the line-based model file format.

A state's index is its position in the declaration order; all
deterministic tie-breaking ("lowest index first") refers to that order,
and for actions to the per-state insertion order.
"""

from fractions import Fraction

from .errors import ContractError, ModelError
from .rational import format_fraction, parse_fraction
from . import graph


class Mdp:
    """Finite MDP with exact rational transition probabilities.

    A state with no enabled actions is terminal.  kind "mc" additionally
    requires at most one enabled action per state.
    """

    def __init__(self, states, init, trans, kind="mdp", allow_unreachable=False):
        if kind not in ("mdp", "mc"):
            raise ModelError("model kind must be 'mdp' or 'mc', got %r" % (kind,))
        self.kind = kind
        self.states = tuple(states)
        self.init = init
        self._index = {}
        for i, s in enumerate(self.states):
            if s in self._index:
                raise ModelError("duplicate state %r" % (s,))
            self._index[s] = i
        if init not in self._index:
            raise ModelError("initial state %r not declared" % (init,))
        self._trans = {}
        for s in self.states:
            acts = trans.get(s)
            if not acts:
                continue
            cleaned = {}
            for a, dist in acts.items():
                total = Fraction(0)
                row = {}
                for t, p in dist.items():
                    if t not in self._index:
                        raise ModelError(
                            "transition (%s, %s) targets undeclared state %r"
                            % (s, a, t))
                    p = Fraction(p)
                    if p < 0:
                        raise ModelError(
                            "negative probability on (%s, %s, %s)" % (s, a, t))
                    total += p
                    if p > 0:
                        row[t] = p
                if total != 1:
                    raise ModelError(
                        "distribution of state %s action %s sums to %s, not 1"
                        % (s, a, total))
                cleaned[a] = row
            if cleaned:
                self._trans[s] = cleaned
        for s in trans:
            if s not in self._index:
                raise ModelError("transition from undeclared state %r" % (s,))
        if kind == "mc":
            for s in self.states:
                if len(self.actions(s)) > 1:
                    raise ModelError(
                        "markov chain state %r enables several actions" % (s,))
        if not allow_unreachable:
            reach = self.reachable_states()
            missing = [s for s in self.states if s not in reach]
            if missing:
                raise ModelError(
                    "unreachable states: %s" % ", ".join(str(s) for s in missing))

    # -- structure queries ------------------------------------------------

    def index(self, s):
        return self._index[s]

    def has_state(self, s):
        return s in self._index

    def is_terminal(self, s):
        return s not in self._trans

    def actions(self, s):
        acts = self._trans.get(s)
        return tuple(acts.keys()) if acts else ()

    def single_action(self, s):
        acts = self.actions(s)
        if len(acts) != 1:
            raise ContractError(
                "state %r does not enable exactly one action" % (s,))
        return acts[0]

    def dist(self, s, a):
        try:
            return self._trans[s][a]
        except KeyError:
            raise ContractError("action %r not enabled in state %r" % (a, s))

    def prob(self, s, a, t):
        return self.dist(s, a).get(t, Fraction(0))

    def successors(self, s, a):
        return self.dist(s, a).keys()

    def enabled_pairs(self):
        for s in self.states:
            for a in self.actions(s):
                yield (s, a)

    def terminal_states(self):
        return [s for s in self.states if self.is_terminal(s)]

    def nonterminal_states(self):
        return [s for s in self.states if not self.is_terminal(s)]

    def all_successors(self, s):
        out = set()
        for a in self.actions(s):
            out.update(self.successors(s, a))
        return out

    def reachable_states(self):
        return graph.reachable_from([self.init], self.all_successors)

    @property
    def is_mc(self):
        return all(len(self.actions(s)) <= 1 for s in self.states)

    def trans_map(self):
        """Deep copy of the transition structure, for derived models."""
        return {s: {a: dict(d) for a, d in acts.items()}
                for s, acts in self._trans.items()}

    def fresh_name(self, base):
        name = base
        n = 0
        while name in self._index:
            n += 1
            name = "%s_%d" % (base, n)
        return name

    def __repr__(self):
        return "Mdp(kind=%r, %d states, init=%r)" % (
            self.kind, len(self.states), self.init)

    def serialize(self):
        lines = [self.kind]
        for s in self.states:
            parts = ["state", str(s)]
            if s == self.init:
                parts.append("init")
            if self.is_terminal(s):
                parts.append("terminal")
            lines.append(" ".join(parts))
        for s in self.states:
            for a in self.actions(s):
                dist = self.dist(s, a)
                for t in sorted(dist, key=self.index):
                    lines.append("trans %s %s %s %s"
                                 % (s, a, t, format_fraction(dist[t])))
        return "\n".join(lines) + "\n"


def make_absorbing(m, stopset):
    """Copy of `m` with all outgoing transitions of `stopset` removed;
    keeps every state (possibly leaving some unreachable)."""
    stopset = set(stopset)
    trans = {s: {a: dict(d) for a, d in acts.items()}
             for s, acts in m.trans_map().items() if s not in stopset}
    return Mdp(m.states, m.init, trans, kind=m.kind, allow_unreachable=True)


def absorbify(m, stopset):
    """Copy of `m` with all outgoing transitions of `stopset` removed,
    restricted to the part still reachable from init."""
    return restrict_reachable(make_absorbing(m, stopset))


def restrict_reachable(m):
    """Copy of `m` without its unreachable states."""
    keep = m.reachable_states()
    states = [s for s in m.states if s in keep]
    trans = {s: acts for s, acts in m.trans_map().items() if s in keep}
    return Mdp(states, m.init, trans, kind=m.kind)


# -- schedulers -----------------------------------------------------------


class MdScheduler:
    """Memoryless deterministic scheduler: one action per covered state."""

    def __init__(self, choice):
        self.choice = dict(choice)

    def act(self, s):
        return self.choice[s]

    def __contains__(self, s):
        return s in self.choice

    def items(self):
        return self.choice.items()

    def to_mr(self):
        return MrScheduler({s: {a: Fraction(1)} for s, a in self.choice.items()})

    def __repr__(self):
        return "MdScheduler(%r)" % (self.choice,)


class MrScheduler:
    """Memoryless randomized scheduler: per-state distribution over
    enabled actions."""

    def __init__(self, choice):
        self.choice = {}
        for s, dist in choice.items():
            total = Fraction(0)
            row = {}
            for a, w in dist.items():
                w = Fraction(w)
                if w < 0:
                    raise ContractError(
                        "negative action weight at state %r" % (s,))
                total += w
                if w > 0:
                    row[a] = w
            if total != 1:
                raise ContractError(
                    "action distribution at state %r sums to %s" % (s, total))
            self.choice[s] = row

    def dist(self, s):
        return self.choice[s]

    def __contains__(self, s):
        return s in self.choice

    def support(self, s):
        return self.choice[s].keys()

    def __repr__(self):
        return "MrScheduler(%r)" % (self.choice,)


class FmScheduler:
    """Finite-memory scheduler: per-(mode, state) action distributions
    plus a mode-switch rule.

    The switch rule observes the taken action and the successor state:
    switch(mode, state, action, next_state) -> next mode.  Rules that
    only depend on the successor can be wrapped with `from_moore`.
    """

    def __init__(self, modes, init_mode, choice, switch):
        self.modes = tuple(modes)
        if init_mode not in self.modes:
            raise ContractError("initial mode %r not among modes" % (init_mode,))
        self.init_mode = init_mode
        self.choice = {}
        for key, dist in choice.items():
            row = {}
            total = Fraction(0)
            for a, w in dist.items():
                w = Fraction(w)
                if w < 0:
                    raise ContractError("negative action weight at %r" % (key,))
                total += w
                if w > 0:
                    row[a] = w
            if total != 1:
                raise ContractError(
                    "action distribution at %r sums to %s" % (key, total))
            self.choice[key] = row
        self.switch = switch

    @classmethod
    def from_moore(cls, modes, init_mode, choice, switch):
        """Adapt a switch rule that sees only the successor state."""
        return cls(modes, init_mode, choice,
                   lambda mode, s, a, t: switch(mode, t))

    def dist(self, mode, s):
        try:
            return self.choice[(mode, s)]
        except KeyError:
            raise ContractError(
                "scheduler undefined at mode %r state %r" % (mode, s))

    def __repr__(self):
        return "FmScheduler(modes=%r)" % (self.modes,)


def as_fm(sched):
    """View an MD/MR scheduler as a one-mode FmScheduler; FM passes through."""
    if isinstance(sched, FmScheduler):
        return sched
    if isinstance(sched, MdScheduler):
        sched = sched.to_mr()
    if not isinstance(sched, MrScheduler):
        raise ContractError("not a scheduler: %r" % (sched,))
    choice = {(0, s): dict(d) for s, d in sched.choice.items()}
    return FmScheduler((0,), 0, choice, lambda mode, s, a, t: 0)


def induced_chain(m, sched):
    """Markov chain induced by a scheduler on `m`.

    Chain states are (mode, state) pairs, explored from the initial
    pair; the chain is built only over what the scheduler actually
    reaches.  MD/MR schedulers get a single dummy mode.
    """
    fm = as_fm(sched)
    start = (fm.init_mode, m.init)
    states = []
    trans = {}
    seen = {start}
    queue = [start]
    while queue:
        cs = queue.pop(0)
        states.append(cs)
        mode, s = cs
        if m.is_terminal(s):
            continue
        dist = fm.dist(mode, s)
        row = {}
        for a, w in dist.items():
            if a not in m.actions(s):
                raise ContractError(
                    "scheduler picks disabled action %r at state %r" % (a, s))
            for t, p in m.dist(s, a).items():
                nxt = (fm.switch(mode, s, a, t), t)
                row[nxt] = row.get(nxt, Fraction(0)) + w * p
        for nxt in row:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
        trans[cs] = {"step": row}
    return Mdp(states, start, trans, kind="mc")


def chain_action_weights(m, sched, chain_state):
    """Action distribution the scheduler uses at a chain state."""
    fm = as_fm(sched)
    mode, s = chain_state
    return fm.dist(mode, s)


# -- model file format ----------------------------------------------------


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def parse_mdp(text, allow_unreachable=False):
    """Parse the line-based model format.

    Header "mdp" or "mc"; then "state NAME [init] [terminal]" and
    "trans STATE ACTION TARGET P/Q" lines ("mc" may omit ACTION).
    '#' starts a comment; probabilities must be fractions or integers.
    """
    kind = None
    order = []
    markers = {}
    init = None
    trans = {}
    triples = set()
    for lineno, toks in _tokens(text):
        where = "line %d" % lineno
        if kind is None:
            if len(toks) == 1 and toks[0] in ("mdp", "mc"):
                kind = toks[0]
                continue
            raise ModelError("%s: expected header 'mdp' or 'mc'" % where)
        if toks[0] == "state":
            if len(toks) < 2:
                raise ModelError("%s: state line needs a name" % where)
            name = toks[1]
            if name in markers:
                raise ModelError("%s: duplicate state %r" % (where, name))
            flags = toks[2:]
            for f in flags:
                if f not in ("init", "terminal"):
                    raise ModelError("%s: unknown state marker %r" % (where, f))
            if len(set(flags)) != len(flags):
                raise ModelError("%s: repeated state marker" % where)
            if "init" in flags:
                if init is not None:
                    raise ModelError("%s: second initial state %r" % (where, name))
                init = name
            order.append(name)
            markers[name] = flags
        elif toks[0] == "trans":
            body = toks[1:]
            if len(body) == 3 and kind == "mc":
                s, t, p = body
                a = "a"
            elif len(body) == 4:
                s, a, t, p = body
            else:
                need = "STATE ACTION TARGET PROB" if kind == "mdp" \
                    else "STATE [ACTION] TARGET PROB"
                raise ModelError("%s: trans line needs %s" % (where, need))
            for name in (s, t):
                if name not in markers:
                    raise ModelError("%s: unknown state %r" % (where, name))
            if "terminal" in markers[s]:
                raise ModelError(
                    "%s: terminal state %r has an outgoing transition"
                    % (where, s))
            if (s, a, t) in triples:
                raise ModelError(
                    "%s: duplicate transition %s %s %s" % (where, s, a, t))
            triples.add((s, a, t))
            prob = parse_fraction(p, where=where)
            trans.setdefault(s, {}).setdefault(a, {})[t] = prob
        else:
            raise ModelError("%s: unknown directive %r" % (where, toks[0]))
    if kind is None:
        raise ModelError("empty model: missing 'mdp'/'mc' header")
    if init is None:
        raise ModelError("no state marked 'init'")
    return Mdp(order, init, trans, kind=kind,
               allow_unreachable=allow_unreachable)
