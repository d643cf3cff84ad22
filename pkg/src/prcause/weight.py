"""Expected accumulated weight before a target visit, and extremal
probability ratios via a reset construction.

Semantics: every visit of a state strictly before the first target
visit adds the state's (nonnegative) weight; runs that never reach the
target accumulate along their entire path.  The minimum ranges over
schedulers reaching the target almost surely; the maximum over all
schedulers and is infinite exactly when an end component touches a
positive-weight state.
"""

from fractions import Fraction

from . import graph, linalg
from .errors import ContractError
from .model import Mdp, MdScheduler, absorbify
from .rational import POS_INF
from .reach import navigate_policy, prob1E

ZERO = Fraction(0)
ONE = Fraction(1)


def _collapse_zero_mecs(m1, w1):
    """Collapse the maximal end components of the zero-weight sub-MDP;
    afterwards every end component contains a positive-weight state."""
    zero = {s for s in m1.states if w1[s] == 0}

    def actions_of(s):
        if s not in zero:
            return ()
        return tuple(a for a in m1.actions(s)
                     if all(t in zero for t in m1.successors(s, a)))

    sub = graph.SubModel([s for s in m1.states if s in zero], actions_of,
                         m1.successors)
    zmecs = sorted(graph.mec_decompose(sub),
                   key=lambda e: min(m1.index(s) for s in e.states))
    class_of = {s: s for s in m1.states}
    members_of = {}
    for i, mec in enumerate(zmecs):
        name = ("zmec", i)
        members_of[name] = frozenset(mec.states)
        for s in mec.states:
            class_of[s] = name
    states = []
    placed = set()
    for s in m1.states:
        cls = class_of[s]
        if cls not in placed:
            placed.add(cls)
            states.append(cls)
    trans = {}
    weights = {}
    for s in m1.states:
        cls = class_of[s]
        weights.setdefault(cls, w1[s] if cls == s else ZERO)
        if m1.is_terminal(s):
            continue
        row = trans.setdefault(cls, {})
        for a in m1.actions(s):
            if cls != s and all(class_of[t] == cls
                                for t in m1.successors(s, a)):
                continue
            label = a if cls == s else ("x", s, a)
            dist = {}
            for t, p in m1.dist(s, a).items():
                key = class_of[t]
                dist[key] = dist.get(key, ZERO) + p
            row[label] = dist
    trans = {s: row for s, row in trans.items() if row}
    m2 = Mdp(states, class_of[m1.init], trans, kind="mdp")
    return m2, weights, members_of


def _evaluate_weight(m2, weights, target, undet, policy):
    idx = {s: i for i, s in enumerate(undet)}
    n = len(undet)
    mat = [[ZERO] * n for _ in range(n)]
    rhs = [ZERO] * n
    for s in undet:
        i = idx[s]
        mat[i][i] = ONE
        rhs[i] += weights[s]
        for t, p in m2.dist(s, policy[s]).items():
            if t in idx:
                mat[i][idx[t]] -= p
            elif t not in target:
                rhs[i] += p * weights[t]
    try:
        sol = linalg.solve(mat, rhs)
    except ValueError:
        raise ContractError("weight system is singular: policy diverges")
    return {s: sol[idx[s]] for s in undet}


def _terminal_value(weights, target, t):
    return ZERO if t in target else weights[t]


def _policy_iteration_weight(m2, weights, target, states, policy, mode):
    """Exact optimal expected weight over the given nonterminal states,
    starting from a proper policy."""
    better = (lambda a, b: a > b) if mode == "max" else (lambda a, b: a < b)

    def backup(s, a, vals):
        total = weights[s]
        for t, p in m2.dist(s, a).items():
            if t in vals:
                total += p * vals[t]
            else:
                total += p * _terminal_value(weights, target, t)
        return total

    allowed = {s: [a for a in m2.actions(s)] for s in states}
    while True:
        vals = _evaluate_weight(m2, weights, target, states, policy)
        changed = False
        for s in states:
            best = vals[s]
            pick = policy[s]
            for a in allowed[s]:
                q = backup(s, a, vals)
                if better(q, best):
                    best = q
                    pick = a
            if pick != policy[s]:
                policy[s] = pick
                changed = True
        if not changed:
            final = {}
            for s in states:
                for a in allowed[s]:
                    if backup(s, a, vals) == vals[s]:
                        final[s] = a
                        break
            return vals, final


def ssp_expected_weight(m, weights, target, mode):
    """Extremal expected total weight accumulated strictly before the
    first target visit, from init, with an attaining MD scheduler.

    min mode ranges over schedulers reaching the target almost surely
    (error when none exists); max mode returns positive infinity (and
    no scheduler) when some end component contains a positive-weight
    state, a finite optimum otherwise.
    """
    if mode not in ("min", "max"):
        raise ContractError("mode must be 'min' or 'max'")
    target = set(target)
    for t in target:
        if not m.has_state(t):
            raise ContractError("unknown target state %r" % (t,))
    w = {}
    for s in m.states:
        w[s] = Fraction(weights.get(s, 0))
        if w[s] < 0:
            raise ContractError("negative weight at state %r" % (s,))
    if m.init in target:
        return ZERO, MdScheduler({})
    m1 = absorbify(m, target)
    w1 = {s: w[s] for s in m1.states}
    if mode == "max":
        for mec in graph.mec_decompose(m1):
            if any(w1[s] > 0 for s in mec.states):
                return POS_INF, None
    m2, w2, members_of = _collapse_zero_mecs(m1, w1)
    target2 = {t for t in target if m2.has_state(t)}
    if mode == "max":
        states = m2.nonterminal_states()
        policy = {s: m2.actions(s)[0] for s in states}
        vals, policy = _policy_iteration_weight(
            m2, w2, target2, states, policy, "max")
    else:
        surely, policy = prob1E(m2, target2)
        if m2.init not in surely:
            raise ContractError(
                "no scheduler reaches the target almost surely")
        states = [s for s in m2.nonterminal_states() if s in surely]
        sub_actions = {s: [a for a in m2.actions(s)
                           if all(t in surely for t in m2.successors(s, a))]
                       for s in states}
        trans3 = {s: {a: dict(m2.dist(s, a)) for a in sub_actions[s]}
                  for s in states}
        order3 = [s for s in m2.states if s in surely]
        m3 = Mdp(order3, m2.init, trans3, kind="mdp", allow_unreachable=True)
        vals, policy = _policy_iteration_weight(
            m3, w2, target2, states, dict(policy), "min")
        m2 = m3
    value = vals.get(m2.init, _terminal_value(w2, target2, m2.init))
    choice = {}
    for s2, a2 in policy.items():
        if s2 in members_of:
            _, u, a = a2
            nav = navigate_policy(m1, members_of[s2], u)
            choice.update(nav)
            choice[u] = a
        else:
            choice[s2] = a2
    for s in m.nonterminal_states():
        choice.setdefault(s, m.actions(s)[0])
    return value, MdScheduler(choice)


def ratio_reset_model(m, upper, lower):
    """Reset model for ratio queries: every terminal outside `lower`
    gets a `reset` edge back to init, so the expected number of
    `upper`-visits before `lower` equals Pr(upper)/Pr(lower)."""
    upper = set(upper)
    lower = set(lower)
    if not lower:
        raise ContractError("denominator state set is empty")
    if upper & lower:
        raise ContractError("ratio state sets overlap")
    for t in upper | lower:
        if not m.has_state(t):
            raise ContractError("unknown state %r" % (t,))
        if not m.is_terminal(t):
            raise ContractError("ratio state %r is not terminal" % (t,))
    if graph.mec_decompose(m):
        raise ContractError("model has end components")
    trans = m.trans_map()
    for t in m.terminal_states():
        if t not in lower:
            trans[t] = {"reset": {m.init: ONE}}
    return Mdp(m.states, m.init, trans, kind="mdp", allow_unreachable=True)


def ratio_extremal(m, upper, lower, mode):
    """Extremal value of Pr(reach `upper`) / Pr(reach `lower`) over
    schedulers with positive denominator, on an EC-free model with
    disjoint terminal sets `upper` and `lower`.

    Computed as the extremal expected number of `upper`-visits before
    `lower` in the model with reset edges from every other terminal
    back to init.
    """
    upper = set(upper)
    lower = set(lower)
    reset = ratio_reset_model(m, upper, lower)
    value, _ = ssp_expected_weight(
        reset, {u: ONE for u in upper}, lower, mode)
    return value
