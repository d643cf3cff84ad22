"""Brute-force oracles for cross-checking the exact algorithms.

Fixed schedulers are evaluated by direct linear algebra on the induced
chain, deliberately bypassing the solvers in `reach`.  Production code
never imports this module; the dependency points the other way.
"""

import itertools
import random
from fractions import Fraction

from . import linalg
from .errors import ContractError
from .model import Mdp, MrScheduler, induced_chain
from .rational import POS_INF

ZERO = Fraction(0)
ONE = Fraction(1)


class SchedulerGrid:
    """Finite family of memoryless randomized schedulers.

    Per-state action weights range over {0, 1/k, ..., 1} and sum to one;
    resolution 0 degenerates to the memoryless deterministic schedulers.
    Every MD scheduler lies on the grid at every resolution.
    """

    def __init__(self, resolution=4):
        if resolution < 0:
            raise ContractError("grid resolution must be nonnegative")
        self.resolution = resolution

    def _state_dists(self, actions):
        acts = list(actions)
        k = self.resolution
        if k == 0:
            return [{a: ONE} for a in acts]
        dists = []
        slots = k + len(acts) - 1
        for cuts in itertools.combinations(range(slots), len(acts) - 1):
            bounds = (-1,) + cuts + (slots,)
            row = {}
            for i, a in enumerate(acts):
                w = bounds[i + 1] - bounds[i] - 1
                if w:
                    row[a] = Fraction(w, k)
            dists.append(row)
        return dists

    def schedulers(self, m):
        """Yield grid schedulers for `m` in a fixed deterministic order."""
        states = [s for s in m.states if not m.is_terminal(s)]
        rows = [self._state_dists(m.actions(s)) for s in states]
        for combo in itertools.product(*rows):
            yield MrScheduler(dict(zip(states, combo)))


def _reach_values(chain, hits, frozen=()):
    """Pr(eventually hit `hits`) from every chain state, exact.

    States in `frozen` are treated as absorbing even when the chain
    moves on from them; that turns reachability into first-hit queries.
    """
    hits = set(hits)
    frozen = set(frozen)
    pred = {cs: [] for cs in chain.states}
    for cs in chain.states:
        if chain.is_terminal(cs) or cs in frozen:
            continue
        for t in chain.dist(cs, chain.single_action(cs)):
            pred[t].append(cs)
    can = set(hits)
    queue = list(hits)
    while queue:
        u = queue.pop()
        for v in pred[u]:
            if v not in can:
                can.add(v)
                queue.append(v)
    vals = {cs: (ONE if cs in hits else ZERO) for cs in chain.states}
    unknown = [cs for cs in chain.states
               if cs in can and cs not in hits and cs not in frozen
               and not chain.is_terminal(cs)]
    if not unknown:
        return vals
    index = {cs: i for i, cs in enumerate(unknown)}
    matrix = []
    rhs = []
    for cs in unknown:
        row = [ZERO] * len(unknown)
        row[index[cs]] = ONE
        b = ZERO
        for t, p in chain.dist(cs, chain.single_action(cs)).items():
            if t in hits:
                b += p
            elif t in index:
                row[index[t]] -= p
        matrix.append(row)
        rhs.append(b)
    for cs, x in zip(unknown, linalg.solve(matrix, rhs)):
        vals[cs] = x
    return vals


def evaluate_scheduler(m, sched, cause, eff):
    """Exact event probabilities of one scheduler on `m`.

    Returns p_eff, p_cause, the joint mass tp, the first-hit split `mu`
    over cause states of the induced chain, and the effect values `veff`
    at those chain states.
    """
    chain = induced_chain(m, sched)
    eff = set(eff)
    cause = set(cause)
    veff = _reach_values(chain, {cs for cs in chain.states if cs[1] in eff})
    cause_states = [cs for cs in chain.states if cs[1] in cause]
    mu = {}
    for c in cause_states:
        mu[c] = _reach_values(chain, {c}, frozen=cause_states)[chain.init]
    p_cause = sum(mu.values(), ZERO)
    tp = sum((mu[c] * veff[c] for c in cause_states), ZERO)
    return {
        "p_eff": veff[chain.init],
        "p_cause": p_cause,
        "tp": tp,
        "mu": mu,
        "veff": veff,
    }


def _check_inputs(m, cause, eff):
    cause = set(cause)
    eff = set(eff)
    if not eff:
        raise ContractError("empty effect set")
    if not cause:
        raise ContractError("empty cause set")
    if cause & eff:
        raise ContractError("cause and effect sets overlap")
    for s in eff:
        if not m.is_terminal(s):
            raise ContractError("effect state %r is not terminal" % (s,))


def refute_pr_oracle(m, cause, eff, kind, grid, inequality="strict"):
    """First grid scheduler violating the probability-raising condition.

    `kind` selects the per-state ("spr") or the global ("gpr") reading.
    Expects an EC-free model; returns None when the grid holds no
    counterexample, which does not prove there is none off the grid.
    """
    from .graph import mec_decompose

    kind = kind.lower()
    if kind not in ("spr", "gpr"):
        raise ContractError("unknown kind %r" % (kind,))
    _check_inputs(m, cause, eff)
    if mec_decompose(m):
        raise ContractError("oracle expects an EC-free model")
    strict = inequality == "strict"
    for sched in grid.schedulers(m):
        ev = evaluate_scheduler(m, sched, cause, eff)
        if _violated(ev, kind, strict):
            return sched
    return None


def _violated(ev, kind, strict):
    p_eff = ev["p_eff"]
    if kind == "gpr":
        if ev["p_cause"] == 0:
            return False
        lhs = ev["tp"]
        rhs = p_eff * ev["p_cause"]
        return lhs <= rhs if strict else lhs < rhs
    for c, w in ev["mu"].items():
        if w == 0:
            continue
        cond = ev["veff"][c]
        if (cond <= p_eff) if strict else (cond < p_eff):
            return True
    return False


def quality_envelope(m, cause, eff, grid):
    """Per-measure minima over the grid with witnessing schedulers.

    Each grid point gives an upper bound on the corresponding true
    infimum, so every returned value is >= the exact quality figure.
    Schedulers never reaching the effect are skipped.
    """
    _check_inputs(m, cause, eff)
    best = {}
    for sched in grid.schedulers(m):
        ev = evaluate_scheduler(m, sched, cause, eff)
        p_eff = ev["p_eff"]
        if p_eff == 0:
            continue
        tp = ev["tp"]
        fn = p_eff - tp
        fp = ev["p_cause"] - tp
        recall = tp / p_eff
        covratio = POS_INF if fn == 0 else tp / fn
        fscore = ZERO if tp == 0 else 2 * tp / (2 * tp + fp + fn)
        for name, value in (("recall", recall), ("covratio", covratio),
                            ("fscore", fscore)):
            cur = best.get(name)
            if cur is None or value < cur[0]:
                best[name] = (value, sched)
    return best


def generate_random_mdp(seed, max_states=6, max_actions=3, ec_free=True):
    """Deterministic small random MDP for property suites.

    With `ec_free` the states form a layered DAG ending in terminals, so
    the result has no end components at all.  Unreachable states are
    pruned; the model always offers at least one reachable terminal.
    """
    rng = random.Random(seed)
    while True:
        m = _draw(rng, max_states, max_actions, ec_free)
        if any(m.is_terminal(s) for s in m.states):
            return m


def _draw(rng, max_states, max_actions, ec_free):
    n = rng.randint(3, max(3, max_states))
    names = ["s%d" % i for i in range(n)]
    if ec_free:
        nterm = rng.randint(2, max(2, n // 2))
        terminals = set(names[n - nterm:])
    else:
        nterm = rng.randint(1, max(1, n // 3))
        terminals = set(rng.sample(names[1:], nterm))
    trans = {}
    labels = "abcdef"
    for i, s in enumerate(names):
        if s in terminals:
            continue
        if ec_free:
            pool = names[i + 1:]
        else:
            pool = names
        if not pool:
            terminals.add(s)
            continue
        rows = {}
        for j in range(rng.randint(1, max_actions)):
            supp = rng.sample(pool, rng.randint(1, min(3, len(pool))))
            weights = [rng.randint(1, 4) for _ in supp]
            total = sum(weights)
            rows[labels[j]] = {t: Fraction(w, total)
                               for t, w in zip(supp, weights)}
        trans[s] = rows
    m = Mdp(names, names[0], trans, allow_unreachable=True)
    return _prune_unreachable(m)


def _prune_unreachable(m):
    keep = {m.init}
    queue = [m.init]
    while queue:
        s = queue.pop()
        for a in m.actions(s):
            for t in m.dist(s, a):
                if t not in keep:
                    keep.add(t)
                    queue.append(t)
    states = [s for s in m.states if s in keep]
    trans = {s: {a: dict(m.dist(s, a)) for a in m.actions(s)}
             for s in states if not m.is_terminal(s)}
    return Mdp(states, m.init, trans, kind=m.kind)
