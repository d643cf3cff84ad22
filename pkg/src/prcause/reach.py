"""Exact reachability analysis.

Extremal (min/max) reachability probabilities are computed by policy
iteration with exact rational linear solves.  To make every policy
evaluation well-posed, the model is first made absorbing at the target
and its maximal end components are collapsed (quotient); qualitative
0/1 state sets are pinned before iterating.
"""

from collections import namedtuple
from fractions import Fraction

from . import graph, linalg
from .errors import ContractError
from .model import (MdScheduler, MrScheduler, as_fm, absorbify,
                    induced_chain, make_absorbing)

ZERO = Fraction(0)
ONE = Fraction(1)

Eventually = namedtuple("Eventually", "target")
Until = namedtuple("Until", "stay target")


# -- qualitative analyses --------------------------------------------------


def prob0_max(m, target):
    """States with Pr^max(reach target) = 0: no path into the target."""
    target = set(target)
    can = graph.backward_reachable(target, m.states, m.all_successors)
    return {s for s in m.states if s not in can}


def zero_min(m, target):
    """States with Pr^min(reach target) = 0, with a witnessing action map.

    Greatest fixed point: a state stays when it is terminal or some
    action keeps the whole support inside the set.
    """
    target = set(target)
    zone = {s for s in m.states if s not in target}
    changed = True
    while changed:
        changed = False
        for s in list(zone):
            if m.is_terminal(s):
                continue
            if not any(all(t in zone for t in m.successors(s, a))
                       for a in m.actions(s)):
                zone.discard(s)
                changed = True
    witness = {}
    for s in zone:
        for a in m.actions(s):
            if all(t in zone for t in m.successors(s, a)):
                witness[s] = a
                break
    return zone, witness


def prob1E(m, target):
    """States from which some scheduler reaches the target almost surely,
    with a witnessing action map (standard attractor iteration)."""
    target = set(target)
    universe = set(m.states)
    while True:
        reached = {s for s in target if s in universe}
        policy = {}
        changed = True
        while changed:
            changed = False
            for s in m.states:
                if s in reached or s not in universe or m.is_terminal(s):
                    continue
                for a in m.actions(s):
                    supp = list(m.successors(s, a))
                    if all(t in universe for t in supp) \
                            and any(t in reached for t in supp):
                        reached.add(s)
                        policy[s] = a
                        changed = True
                        break
        if reached == universe:
            return reached, policy
        universe = reached


def _ones_min(m, target, zeros):
    """States with Pr^min(reach target) = 1: no target-avoiding path
    into the zero region."""
    target = set(target)
    nodes = [s for s in m.states if s not in target]

    def succ(s):
        return [t for t in m.all_successors(s) if t not in target]

    can_avoid = graph.backward_reachable(zeros, nodes, succ)
    return {s for s in m.states if s in target or s not in can_avoid}


# -- policy iteration on the quotient -------------------------------------


def _evaluate(mq, undet, policy, bounds):
    idx = {s: i for i, s in enumerate(undet)}
    n = len(undet)
    mat = [[ZERO] * n for _ in range(n)]
    rhs = [ZERO] * n
    for s in undet:
        i = idx[s]
        mat[i][i] = ONE
        for t, p in mq.dist(s, policy[s]).items():
            if t in idx:
                mat[i][idx[t]] -= p
            else:
                rhs[i] += p * bounds[t]
    sol = linalg.solve(mat, rhs)
    return {s: sol[idx[s]] for s in undet}


def _backup(mq, s, a, vals):
    return sum((p * vals[t] for t, p in mq.dist(s, a).items()), ZERO)


def _policy_iteration(mq, target, mode):
    """Exact optimal reachability values and a full policy on the
    EC-free quotient `mq`."""
    target = set(target)
    if mode == "max":
        zeros = prob0_max(mq, target)
        ones, boundary_policy = prob1E(mq, target)
    else:
        zeros, zero_witness = zero_min(mq, target)
        ones = _ones_min(mq, target, zeros)
        boundary_policy = zero_witness
    vals = {}
    for s in mq.states:
        if s in ones:
            vals[s] = ONE
        elif s in zeros:
            vals[s] = ZERO
    undet = [s for s in mq.states
             if s not in vals and not mq.is_terminal(s)]
    for s in mq.states:
        if s not in vals and mq.is_terminal(s):
            # terminal, neither target nor classified: unreachable corner
            vals[s] = ONE if s in target else ZERO
    better = (lambda a, b: a > b) if mode == "max" else (lambda a, b: a < b)
    policy = {s: mq.actions(s)[0] for s in undet}
    while undet:
        vals_u = _evaluate(mq, undet, policy, vals)
        current = dict(vals)
        current.update(vals_u)
        changed = False
        for s in undet:
            best = current[s]
            pick = policy[s]
            for a in mq.actions(s):
                q = _backup(mq, s, a, current)
                if better(q, best):
                    best = q
                    pick = a
            if pick != policy[s]:
                policy[s] = pick
                changed = True
        if not changed:
            vals = current
            break
    # deterministic extraction: lowest action index attaining the optimum
    full_policy = {}
    for s in mq.states:
        if mq.is_terminal(s):
            continue
        if s in undet:
            for a in mq.actions(s):
                if _backup(mq, s, a, vals) == vals[s]:
                    full_policy[s] = a
                    break
        elif s in boundary_policy:
            full_policy[s] = boundary_policy[s]
        else:
            full_policy[s] = mq.actions(s)[0]
    return vals, full_policy


def navigate_policy(m, members, goal):
    """MD choices steering a MEC (`members` of `m`) to `goal` almost
    surely, using only actions whose support stays inside the MEC."""
    members = set(members)
    internal = {s: [a for a in m.actions(s)
                    if all(t in members for t in m.successors(s, a))]
                for s in members}
    dist = {goal: 0}
    nav = {}
    changed = True
    while changed:
        changed = False
        for s in sorted(members, key=m.index):
            if s in dist:
                continue
            for a in internal[s]:
                hits = [dist[t] for t in m.successors(s, a) if t in dist]
                if hits:
                    dist[s] = min(hits) + 1
                    nav[s] = a
                    changed = True
                    break
    missing = members - set(dist)
    if missing:
        raise ContractError("end component cannot steer to %r" % (goal,))
    return nav


def lift_quotient_policy(m1, smap, qpolicy):
    """Turn a full policy on mec_quotient(m1) into MD choices on m1.

    At a collapsed component the quotient action is either an exit pair
    (navigate to the exit state, then take the exit action) or the
    escape action tau (stay inside: any internal action per state).
    """
    choice = {}
    collapsed = set()
    for members in smap.mec_members.values():
        collapsed.update(members)
    for s in m1.nonterminal_states():
        if s not in collapsed:
            choice[s] = qpolicy[smap.image(s)]
    for super_name, members in smap.mec_members.items():
        act = qpolicy[super_name]
        pair = smap.exit_pairs.get((super_name, act))
        if pair is None:
            # tau: remain inside the component forever
            for s in members:
                for a in m1.actions(s):
                    if all(t in members for t in m1.successors(s, a)):
                        choice[s] = a
                        break
        else:
            exit_state, exit_action = pair
            nav = navigate_policy(m1, members, exit_state)
            choice.update(nav)
            choice[exit_state] = exit_action
    return choice


def _check_states(m, names, what):
    out = set()
    for s in names:
        if not m.has_state(s):
            raise ContractError("unknown %s state %r" % (what, s))
        out.add(s)
    return out


def _extremal_reach(m, target, mode):
    from .transforms import mec_quotient
    target = _check_states(m, target, "target")
    m1 = make_absorbing(m, target)
    mq, smap = mec_quotient(m1)
    tq = {smap.image(t) for t in target}
    vals_q, qpolicy = _policy_iteration(mq, tq, mode)
    vals = {}
    for s in m.states:
        vals[s] = ONE if s in target else vals_q[smap.image(s)]
    choice = lift_quotient_policy(m1, smap, qpolicy)
    for s in m.nonterminal_states():
        if s not in choice:
            # absorbed target states: any enabled action will do
            choice[s] = m.actions(s)[0]
    return vals, MdScheduler(choice)


def max_reach_prob(m, target):
    """Per-state Pr^max(reach target) plus an optimal MD scheduler."""
    return _extremal_reach(m, target, "max")


def min_reach_prob(m, target):
    """Per-state Pr^min(reach target) plus an optimal MD scheduler."""
    return _extremal_reach(m, target, "min")


def max_constrained_reach(m, avoid, c):
    """Pr^max of reaching `c` from init without visiting `avoid` first."""
    _check_states(m, avoid, "avoid")
    _check_states(m, [c], "goal")
    m1 = make_absorbing(m, set(avoid) | {c})
    vals, _ = max_reach_prob(m1, {c})
    return vals[m.init]


# -- fixed-scheduler analysis ----------------------------------------------


def chain_reach_values(chain, target, block=frozenset()):
    """Per-state Pr(not-block Until target) in a Markov chain.

    Target membership wins over block membership; blocked and
    value-zero states are pinned by a graph pass, the rest is one
    exact linear solve.
    """
    target = set(target)
    block = {s for s in block if s not in target}
    nodes = [s for s in chain.states if s not in block]

    def succ(s):
        if s in target:
            return []
        return [t for t in chain.all_successors(s) if t not in block]

    can = graph.backward_reachable(target, nodes, succ)
    vals = {}
    for s in chain.states:
        if s in target:
            vals[s] = ONE
        elif s not in can:
            vals[s] = ZERO
    undet = [s for s in chain.states if s not in vals]
    if undet:
        idx = {s: i for i, s in enumerate(undet)}
        n = len(undet)
        mat = [[ZERO] * n for _ in range(n)]
        rhs = [ZERO] * n
        for s in undet:
            i = idx[s]
            mat[i][i] = ONE
            for t, p in chain.dist(s, chain.single_action(s)).items():
                if t in idx:
                    mat[i][idx[t]] -= p
                else:
                    rhs[i] += p * vals[t]
        sol = linalg.solve(mat, rhs)
        for s in undet:
            vals[s] = sol[idx[s]]
    return vals


def chain_expected_visits(chain, absorbing=frozenset()):
    """Expected visit counts per chain state from init, stopping on
    arrival in `absorbing` (or a terminal state).

    Raises if a reachable recurrent class survives outside the stop
    set, since counts would diverge there.
    """
    absorbing = set(absorbing)
    stopped = absorbify(chain, absorbing)
    for comp in graph.sccs(stopped.states, stopped.all_successors):
        trivial = len(comp) == 1
        s = next(iter(comp))
        if trivial and not any(s in stopped.successors(s, a)
                               for a in stopped.actions(s)):
            continue
        if all(stopped.is_terminal(t) for t in comp):
            continue
        # cycles with an escape edge stay transient; only closed
        # components trap probability mass
        if all(set(stopped.all_successors(t)) <= comp for t in comp):
            raise ContractError(
                "expected visit counts diverge: recurrent states %s"
                % sorted(map(str, comp)))
    transient = [s for s in stopped.states if not stopped.is_terminal(s)]
    idx = {s: i for i, s in enumerate(transient)}
    n = len(transient)
    mat = [[ZERO] * n for _ in range(n)]
    rhs = [ZERO] * n
    for s in transient:
        mat[idx[s]][idx[s]] += ONE
        if s == stopped.init:
            rhs[idx[s]] += ONE
        for t, p in stopped.dist(s, stopped.single_action(s)).items():
            if t in idx:
                mat[idx[t]][idx[s]] -= p
    sol = linalg.solve(mat, rhs) if n else []
    visits = {s: ZERO for s in chain.states}
    for s in transient:
        visits[s] = sol[idx[s]]
    for s in stopped.states:
        if stopped.is_terminal(s):
            inflow = ONE if s == stopped.init else ZERO
            for u in transient:
                inflow += visits[u] * stopped.prob(
                    u, stopped.single_action(u), s)
            visits[s] = inflow
    return visits


class FrequencyVector:
    """Expected occurrence counts of state-action pairs (and states)."""

    def __init__(self, pair, state):
        self.pair = dict(pair)
        self.state = dict(state)

    def of_pair(self, s, a):
        return self.pair.get((s, a), ZERO)

    def of_state(self, s):
        return self.state.get(s, ZERO)


def scheduler_frequencies(m, sched):
    """Exact expected state-action frequencies of a scheduler on an
    EC-free MDP; the state entry of a terminal equals its reachability
    probability."""
    if graph.mec_decompose(m):
        raise ContractError("model has end components; frequencies diverge")
    fm = as_fm(sched)
    chain = induced_chain(m, fm)
    visits = chain_expected_visits(chain)
    pair = {}
    state = {}
    for cs, count in visits.items():
        mode, s = cs
        state[s] = state.get(s, ZERO) + count
        if not m.is_terminal(s):
            for a, w in fm.dist(mode, s).items():
                key = (s, a)
                pair[key] = pair.get(key, ZERO) + count * w
    return FrequencyVector(pair, state)


def _as_mr(sched):
    if isinstance(sched, MdScheduler):
        return sched.to_mr()
    return sched


def convex_combine(m, s1, s2, lam):
    """MR scheduler whose terminal reachability probabilities are the
    exact lambda-mix of the two given schedulers' (EC-free models)."""
    lam = Fraction(lam)
    if not ZERO < lam < ONE:
        raise ContractError("mixing weight must lie strictly in (0,1)")
    f1 = scheduler_frequencies(m, s1)
    f2 = scheduler_frequencies(m, s2)
    choice = {}
    for s in m.nonterminal_states():
        total = lam * f1.of_state(s) + (ONE - lam) * f2.of_state(s)
        if total > 0:
            row = {}
            for a in m.actions(s):
                w = lam * f1.of_pair(s, a) + (ONE - lam) * f2.of_pair(s, a)
                if w > 0:
                    row[a] = w / total
            choice[s] = row
        else:
            choice[s] = {m.actions(s)[0]: ONE}
    return MrScheduler(choice)


def reach_prob_under(m, sched, event):
    """Exact probability of an Until/Eventually event in the chain a
    scheduler induces on `m`."""
    if isinstance(event, Eventually):
        stay = None
        target = set(event.target)
    elif isinstance(event, Until):
        stay = _check_states(m, event.stay, "stay")
        target = set(event.target)
    else:
        raise ContractError("event must be Eventually or Until")
    _check_states(m, target, "target")
    chain = induced_chain(m, sched)
    chain_target = {cs for cs in chain.states if cs[1] in target}
    if stay is None:
        block = frozenset()
    else:
        block = {cs for cs in chain.states
                 if cs[1] not in stay and cs[1] not in target}
    return chain_reach_values(chain, chain_target, block)[chain.init]


def first_hit_distribution(chain, stopset):
    """Probability, per stop state, that it is the first stop state the
    chain visits (from init)."""
    stopset = set(stopset)
    out = {}
    for s0 in stopset:
        out[s0] = chain_reach_values(chain, {s0}, stopset - {s0})[chain.init]
    return out
