"""Synthesis of quality-optimal causes.

The canonical cause (all singleton probability-raising states, front
first) is recall- and ratio-optimal among the per-state causes.  For
Markov chains an f-score-optimal cause drops out of one expected-weight
solve on a declare-or-continue model.  The f-score threshold question
on MDPs and the globally optimal causes are settled by budgeted
enumeration of front-closed candidate sets, each judged exactly.
"""

import itertools
import os
from fractions import Fraction

from .checking import (DEFAULT_BUDGET, CauseQuery, check_gpr,
                       spr_singleton_check)
from .errors import ContractError, UndecidedError
from .model import Mdp
from .quality import fscore, recall_covratio
from .reach import max_constrained_reach, min_reach_prob
from .transforms import GAMMA, _check_cause_eff, cause_split, mec_quotient
from .weight import ssp_expected_weight

ZERO = Fraction(0)
ONE = Fraction(1)
TWO = Fraction(2)


class OptimalResult:
    """A synthesized cause with the quality it was optimized for."""

    def __init__(self, cause, measure, value, method):
        self.cause = frozenset(cause)
        self.measure = measure
        self.value = value
        self.method = method

    def __repr__(self):
        return "OptimalResult(cause=%s, %s=%s, method=%r)" % (
            sorted(map(str, self.cause)), self.measure, self.value,
            self.method)


def _budget_limit(budget):
    if budget is None:
        return int(os.environ.get("PRCAUSE_BUDGET", DEFAULT_BUDGET))
    return budget


def _singleton_pr_states(m, eff):
    return [s for s in m.states
            if s not in eff and not m.is_terminal(s)
            and spr_singleton_check(m, s, eff)]


def _front(m, group):
    return frozenset(c for c in group
                     if max_constrained_reach(m, group, c) > 0)


def canonical_cause(m, eff):
    """Front of the singleton probability-raising states, with its
    recall and coverage ratio; None when no such state exists."""
    eff = frozenset(eff)
    _check_cause_eff(m, set(), set(eff))
    states = _singleton_pr_states(m, eff)
    if not states:
        return None
    cause = _front(m, frozenset(states))
    recall, covratio, _ = recall_covratio(m, cause, eff, assume_cause=True)
    return cause, recall, covratio


def fscore_optimal_mc(mc, eff):
    """F-score-optimal per-state cause of a Markov chain.

    Cyclic bottom components are collapsed first; each singleton
    probability-raising state then gets a declare action splitting into
    a covered-effect and a cause-without-effect terminal, terminals
    reset, and the minimal expected number of miss-visits per covered
    effect yields the optimum: fscore = 2/(f+2), cause = the front of
    the states whose declare action the minimizing policy picks.
    """
    if not mc.is_mc:
        raise ContractError("f-score synthesis expects a Markov chain")
    eff = frozenset(eff)
    _check_cause_eff(mc, set(), set(eff))
    quot, _ = mec_quotient(mc)
    cands = _singleton_pr_states(quot, eff)
    if not cands:
        raise ContractError("model has no probability-raising state")
    wvals = min_reach_prob(quot, eff)[0]

    eff_cov = quot.fresh_name("eff_cov")
    noeff_c = quot.fresh_name("noeff_c")
    trans = quot.trans_map()
    declare = {}
    for c in cands:
        label = GAMMA
        while label in trans[c]:
            label += "'"
        declare[c] = label
        trans[c][label] = {eff_cov: wvals[c], noeff_c: ONE - wvals[c]}
    for t in quot.terminal_states():
        trans[t] = {"alpha": {quot.init: ONE}}
    trans[noeff_c] = {"alpha": {quot.init: ONE}}
    k = Mdp(list(quot.states) + [eff_cov, noeff_c], quot.init, trans,
            allow_unreachable=True)

    weights = {u: ONE for u in eff}
    weights[noeff_c] = ONE
    f, policy = ssp_expected_weight(k, weights, {eff_cov}, "min")
    selected = frozenset(c for c in cands if policy.act(c) == declare[c])
    cause = _front(quot, selected)
    return cause, TWO / (f + TWO)


def spr_fscore_threshold(m, eff, theta, strict=True, budget=None):
    """Is there a per-state probability-raising cause whose worst-case
    f-score beats `theta`?

    Realized by enumerating front-closed subsets of the singleton
    probability-raising states; each subset is judged by one minimal
    expected-weight solve on a two-copy model whose terminal weights
    encode 2(1-theta)*tp - theta*fp - theta*fn, shifted by theta so
    they stay nonnegative.
    """
    eff = frozenset(eff)
    _check_cause_eff(m, set(), set(eff))
    theta = Fraction(theta)
    if (strict and theta >= 1) or theta > 1:
        return False
    quot, _ = mec_quotient(m)
    cands = _singleton_pr_states(quot, eff)
    if not cands:
        return False
    if theta < 0 or (not strict and theta == 0):
        return True

    dvals = min_reach_prob(quot, eff)[0]
    if dvals[quot.init] == 0:
        k = _leave_min_region(quot, dvals)
        if k is None:
            return False
    else:
        k = quot

    limit = _budget_limit(budget)
    examined = 0
    for size in range(1, len(cands) + 1):
        for combo in itertools.combinations(cands, size):
            examined += 1
            if examined > limit:
                raise UndecidedError(
                    "subset budget %d exceeded while searching "
                    "threshold causes" % (limit,))
            group = frozenset(combo)
            if _front(quot, group) != group:
                continue
            if _group_beats(k, group, eff, theta, strict):
                return True
    return False


def _leave_min_region(n, dvals):
    # schedulers with a chance of the effect are exactly those leaving
    # the region where the minimal effect probability is zero; a fresh
    # initial state offering each leaving pair restricts to them
    region = {s for s, v in dvals.items() if v == 0}
    act_min = {}
    for s in region:
        if n.is_terminal(s):
            act_min[s] = []
            continue
        act_min[s] = [a for a in n.actions(s)
                      if all(t in region for t in n.dist(s, a))]
    inside = {n.init}
    queue = [n.init]
    while queue:
        s = queue.pop()
        for a in act_min[s]:
            for t in n.dist(s, a):
                if t not in inside:
                    inside.add(t)
                    queue.append(t)
    leaving = [(s, a) for s in sorted(inside, key=n.index)
               for a in n.actions(s) if a not in act_min[s]]
    if not leaving:
        return None
    init_k = n.fresh_name("enter")
    trans = n.trans_map()
    trans[init_k] = {
        "via.%s.%s" % (s, a): dict(n.dist(s, a)) for s, a in leaving}
    return Mdp([init_k] + list(n.states), init_k, trans,
               allow_unreachable=True)


def _group_beats(k, group, eff, theta, strict):
    split, _ = cause_split(k, group)
    trans = split.trans_map()
    sink = split.fresh_name("done")
    weights = {}
    for cs in split.states:
        if not split.is_terminal(cs):
            continue
        t, bit = cs
        if t in eff:
            weights[cs] = TWO - theta if bit == 1 else ZERO
        else:
            weights[cs] = ZERO if bit == 1 else theta
        trans[cs] = {"done": {sink: ONE}}
    kc = Mdp(list(split.states) + [sink], split.init, trans,
             allow_unreachable=True)
    val, _ = ssp_expected_weight(kc, weights, {sink}, "min")
    return val > theta if strict else val >= theta


def gpr_optimal(m, eff, measure, budget=None):
    """Globally optimal cause for one quality measure, by budgeted
    enumeration of front-closed candidate sets.

    Ties break towards the lexicographically smallest cause; an
    infinite coverage ratio ranks above every finite one.  None when
    nothing qualifies.
    """
    eff = frozenset(eff)
    _check_cause_eff(m, set(), set(eff))
    if measure not in ("recall", "covratio", "fscore"):
        raise ContractError("unknown measure %r" % (measure,))
    universe = [s for s in m.states if s not in eff]
    limit = _budget_limit(budget)
    examined = 0
    best = None
    for size in range(1, len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            examined += 1
            if examined > limit:
                raise UndecidedError(
                    "candidate budget %d exceeded while searching "
                    "optimal causes" % (limit,))
            cause = frozenset(combo)
            if _front(m, cause) != cause:
                continue
            if not check_gpr(CauseQuery(m, cause, eff, "gpr")):
                continue
            value = _measure_value(m, cause, eff, measure)
            key = tuple(sorted(map(str, cause)))
            if best is None or value > best[0] \
                    or (value == best[0] and key < best[1]):
                best = (value, key, cause)
    if best is None:
        return None
    return OptimalResult(best[2], measure, best[0], "enumeration")


def _measure_value(m, cause, eff, measure):
    if measure == "fscore":
        return fscore(m, cause, eff, assume_cause=True)[0]
    recall, covratio, _ = recall_covratio(m, cause, eff, assume_cause=True)
    return recall if measure == "recall" else covratio


def gpr_threshold(m, eff, measure, theta, strict=False, budget=None):
    """True when some cause reaches `theta` on the measure; the
    comparison is at-least unless `strict` asks for exceeds."""
    result = gpr_optimal(m, eff, measure, budget=budget)
    if result is None:
        return False
    return result.value > theta if strict else result.value >= theta
