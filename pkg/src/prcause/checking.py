"""Deciding whether a state set raises the probability of an effect.

Two notions are supported.  The per-state ("strict") condition asks
that reaching any single cause state first pushes the conditional
effect probability above the unconditional one, under every scheduler
that gives the cause positive probability.  The global condition asks
the same for reaching the cause set as a whole.  Both default to a
strict inequality; the non-strict variants are selected per query.

False verdicts carry a replayable refutation: a memoryless randomized
scheduler on the canonical form together with a two-mode finite-memory
scheduler on the original model that exhibits the violated inequality.
"""

import itertools
import os
from fractions import Fraction

from . import linalg
from .errors import ContractError, UndecidedError
from .model import (FmScheduler, MdScheduler, Mdp, MrScheduler, as_fm,
                    induced_chain)
from .reach import (FrequencyVector, chain_expected_visits,
                    chain_reach_values, convex_combine,
                    first_hit_distribution, max_constrained_reach,
                    max_reach_prob, min_reach_prob, navigate_policy,
                    scheduler_frequencies)
from .transforms import GAMMA, _check_cause_eff, canonical_form, cause_split, wmin_cause

ZERO = Fraction(0)
ONE = Fraction(1)

# zero-set enumeration cap for the global check; see solve_quadratic_system
DEFAULT_BUDGET = 2 ** 20


class CauseQuery:
    """One causality question: model, candidate cause, effect set,
    which condition to check and with which inequality."""

    def __init__(self, model, cause, eff, strictness, inequality="strict"):
        self.model = model
        self.cause = frozenset(cause)
        self.eff = frozenset(eff)
        if not self.cause:
            raise ContractError("cause set is empty")
        _check_cause_eff(model, set(self.cause), set(self.eff))
        strictness = str(strictness).lower()
        if strictness not in ("spr", "gpr"):
            raise ContractError(
                "strictness must be 'spr' or 'gpr', got %r" % (strictness,))
        self.strictness = strictness
        if inequality not in ("strict", "non-strict"):
            raise ContractError(
                "inequality must be 'strict' or 'non-strict', got %r"
                % (inequality,))
        self.inequality = inequality

    @property
    def strict(self):
        return self.inequality == "strict"

    def __repr__(self):
        return "CauseQuery(%s, cause=%s, eff=%s, %s)" % (
            self.strictness, sorted(map(str, self.cause)),
            sorted(map(str, self.eff)), self.inequality)


class PrWitness:
    """Refuting scheduler: MR form on the canonical model (when the
    refutation went through it), lifted scheduler on the original
    model, and the exact probabilities of the replayed violation."""

    def __init__(self, canonical, lifted, replay):
        self.canonical = canonical
        self.lifted = lifted
        self.replay = dict(replay)

    def __repr__(self):
        return "PrWitness(replay=%r)" % (self.replay,)


class CauseVerdict:
    def __init__(self, is_cause, minimality_failures=frozenset(),
                 refuting_witness=None, violated_condition=None):
        self.is_cause = bool(is_cause)
        self.minimality_failures = frozenset(minimality_failures)
        self.refuting_witness = refuting_witness
        self.violated_condition = violated_condition

    def __bool__(self):
        return self.is_cause

    def __repr__(self):
        if self.is_cause:
            return "CauseVerdict(True)"
        return "CauseVerdict(False, violated=%r)" % (self.violated_condition,)


def check_minimality(q):
    """Cause states that cannot be the first cause state on any path."""
    return frozenset(c for c in q.cause
                     if max_constrained_reach(q.model, q.cause, c) == 0)


def _backup(m, s, a, vals):
    return sum((p * vals[t] for t, p in m.dist(s, a).items()), ZERO)


def _value_submdp_reaches(n, qvals, c):
    """Is c reachable from init using only actions that preserve the
    maximal effect value?"""
    seen = {n.init}
    queue = [n.init]
    while queue:
        s = queue.pop(0)
        if s == c:
            return True
        for a in n.actions(s):
            if _backup(n, s, a, qvals) != qvals[s]:
                continue
            for t in n.successors(s, a):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    return False


def _per_state_ok(n, qvals, c, w_c, strict):
    q0 = qvals[n.init]
    if not strict:
        return q0 <= w_c
    if q0 < w_c:
        return True
    if q0 > w_c:
        return False
    return not _value_submdp_reaches(n, qvals, c)


def spr_singleton_check(m, c, eff, strict=True):
    """Per-state condition for the singleton {c}: transform c's choices
    into the single minimal-effect split, compare the transformed
    model's maximal effect probability against that split, and settle
    ties by reachability of c through value-preserving actions."""
    eff = frozenset(eff)
    _check_cause_eff(m, {c}, set(eff))
    n, nmap = wmin_cause(m, frozenset([c]), eff)
    qvals, _ = max_reach_prob(n, eff)
    w_c = n.prob(c, GAMMA, nmap.designated["eff_star"])
    return _per_state_ok(n, qvals, c, w_c, strict)


def _first_visit_unfolding(m, cause, c):
    """Copy of `m` split at the first cause visit: arriving at c before
    any other cause state is a designated fresh state, arriving at a
    different cause state first falls into a plain second copy where
    every state (c included) keeps its original choices."""
    first = ("first", c)

    def enter(t, bit):
        if bit == 0 and t in cause:
            return first if t == c else (1, t)
        return (bit, t)

    start = enter(m.init, 0)
    order = []
    trans = {}
    seen = {start}
    queue = [start]
    while queue:
        x = queue.pop(0)
        order.append(x)
        s = c if x == first else x[1]
        if m.is_terminal(s):
            continue
        bit = 0 if (x != first and x[0] == 0) else 1
        row = {}
        for a in m.actions(s):
            dist = {}
            for t, p in m.dist(s, a).items():
                nxt = enter(t, bit)
                dist[nxt] = p
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
            row[a] = dist
        trans[x] = row
    out = Mdp(order, start, trans, kind=m.kind)
    return out, first


def _per_state_spr(m, cause, eff, c, strict):
    """Decide the per-state condition at c with the other cause states
    left free, via the singleton criterion on the first-visit
    unfolding."""
    um, first = _first_visit_unfolding(m, cause, c)
    ueff = frozenset(x for x in um.states if x != first and x[1] in eff)
    n, nmap = wmin_cause(um, frozenset([first]), ueff)
    qvals, _ = max_reach_prob(n, ueff)
    w = n.prob(first, GAMMA, nmap.designated["eff_star"])
    if _per_state_ok(n, qvals, first, w, strict):
        return True, None
    return False, ("greater" if qvals[n.init] > w else "equal")


def check_spr(q, relaxed_minimality=False):
    """Per-state condition for every cause state.

    Each state is judged on its own first-visit unfolding; replacing
    the whole cause set by minimal splits at once would cap what the
    adversary may play at the other cause states and accept sets whose
    global probability can still be pushed up to a state's conditional.
    """
    if q.strictness != "spr":
        raise ContractError("query strictness is %r, expected spr"
                            % (q.strictness,))
    cause, viol, early = _minimality_gate(q, relaxed_minimality)
    if early is not None:
        return early
    for c in sorted(cause, key=q.model.index):
        ok, kind = _per_state_spr(q.model, cause, q.eff, c, q.strict)
        if ok:
            continue
        witness = _spr_witness(q.model, cause, q.eff, c, kind, q.strict)
        return CauseVerdict(False, minimality_failures=viol,
                            refuting_witness=witness,
                            violated_condition=("S", c))
    return CauseVerdict(True, minimality_failures=viol)


def _minimality_gate(q, relaxed):
    viol = check_minimality(q)
    if viol and not relaxed:
        return None, viol, CauseVerdict(
            False, minimality_failures=viol,
            violated_condition=("minimality", viol))
    cause = frozenset(q.cause - viol)
    if not cause:
        return None, viol, CauseVerdict(
            False, minimality_failures=viol,
            violated_condition=("minimality", viol))
    return cause, viol, None


def exists_cause(m, eff):
    """Most precise single state passing the per-state condition, or
    None; ties broken towards the earliest declared state."""
    eff = frozenset(eff)
    _check_cause_eff(m, set(), set(eff))
    vals, _ = min_reach_prob(m, eff)
    best = None
    for s in m.states:
        if s in eff:
            continue
        if spr_singleton_check(m, s, eff):
            if best is None or vals[s] > best[1]:
                best = (s, vals[s])
    return best


def replay_pr(m, sched, cause, eff, first=None):
    """Exact probabilities a scheduler realizes: effect, cause,
    effect-and-cause, the conditional effect probability given the
    cause, and (with `first`) the same conditioned on that state being
    the first cause state reached."""
    chain = induced_chain(m, as_fm(sched))
    eset = {cs for cs in chain.states if cs[1] in eff}
    vals = chain_reach_values(chain, eset)
    stop = {cs for cs in chain.states if cs[1] in cause}
    mu = first_hit_distribution(chain, stop)
    p_eff = vals[chain.init]
    p_cause = sum(mu.values(), ZERO)
    p_both = sum((mu[cs] * vals[cs] for cs in mu), ZERO)
    out = {
        "p_eff": p_eff,
        "p_cause": p_cause,
        "p_both": p_both,
        "conditional": p_both / p_cause if p_cause > 0 else None,
    }
    if first is not None:
        pf = sum((p for cs, p in mu.items() if cs[1] == first), ZERO)
        pb = sum((mu[cs] * vals[cs] for cs in mu if cs[1] == first), ZERO)
        out["p_first"] = pf
        out["p_both_first"] = pb
        out["conditional_first"] = pb / pf if pf > 0 else None
    return out


def _escape_label(maps, super_name, actions):
    for a in actions:
        if (super_name, a) not in maps.exit_pairs:
            return a
    raise ContractError("no escape action at %r" % (super_name,))


def _detau(canon, mr):
    """Drop fractional stay-forever choices from an MR scheduler on the
    canonical model by rescaling the exit mass.  Routing the stay mass
    through the exits can only increase terminal reachabilities, so a
    strict per-state violation survives."""
    maps = canon.state_map
    choice = {}
    for s in canon.mdp.nonterminal_states():
        row = dict(mr.dist(s))
        if s in maps.mec_members:
            esc = _escape_label(maps, s, canon.mdp.actions(s))
            wt = row.get(esc, ZERO)
            if ZERO < wt < ONE:
                row.pop(esc)
                scale = ONE / (ONE - wt)
                row = {a: p * scale for a, p in row.items()}
        choice[s] = row
    return MrScheduler(choice)


def _conserving_to_c(canon, qv, c):
    """MD scheduler on the canonical model that keeps the maximal
    effect value at every step while steering towards c."""
    cm = canon.mdp
    allowed = {}
    for s in cm.nonterminal_states():
        acts = [a for a in cm.actions(s) if _backup(cm, s, a, qv) == qv[s]]
        if not acts:
            raise ContractError("no value-preserving action at %r" % (s,))
        allowed[s] = acts
    hops = {c: 0}
    pick = {}
    changed = True
    while changed:
        changed = False
        for s in cm.nonterminal_states():
            if s in hops:
                continue
            for a in allowed[s]:
                steps = [hops[t] for t in cm.successors(s, a) if t in hops]
                if steps:
                    hops[s] = min(steps) + 1
                    pick[s] = a
                    changed = True
                    break
    if cm.init not in hops:
        raise ContractError(
            "internal: %r not reachable through value-preserving actions"
            % (c,))
    choice = {}
    for s in cm.nonterminal_states():
        choice[s] = pick.get(s, allowed[s][0])
    return MdScheduler(choice).to_mr()


def _fold_unfolded_scheduler(m, cause, eff, c, inner):
    """Collapse a two-mode witness on the first-visit unfolding into a
    three-mode scheduler on the original model: before any cause state,
    after some other cause state came first, and minimizing once c was
    reached first."""
    _, mdmin = min_reach_prob(m, eff)
    choice = {}
    for s in m.nonterminal_states():
        pre = inner.choice.get(("before", (0, s)))
        one = inner.choice.get(("before", (1, s)))
        fallback = {m.actions(s)[0]: ONE}
        choice[("pre", s)] = dict(pre) if pre else dict(fallback)
        choice[("one", s)] = dict(one) if one else dict(fallback)
        choice[("min", s)] = {mdmin.act(s): ONE}

    def switch(mode, t):
        if mode == "pre" and t == c:
            return "min"
        if mode == "pre" and t in cause:
            return "one"
        return mode

    if m.init == c:
        init_mode = "min"
    elif m.init in cause:
        init_mode = "one"
    else:
        init_mode = "pre"
    return FmScheduler.from_moore(("pre", "one", "min"), init_mode, choice,
                                  switch)


def _spr_witness(m, cause, eff, c, kind, strict):
    um, first = _first_visit_unfolding(m, cause, c)
    ueff = frozenset(x for x in um.states if x != first and x[1] in eff)
    canon, smap = canonical_form(um, frozenset([first]), ueff)
    cm = canon.mdp
    targets = {canon.eff_cov, canon.eff_unc}
    qv, qmax = max_reach_prob(cm, targets)
    q0 = qv[cm.init]
    w_c = canon.w[first]
    if kind == "greater":
        # mix weight above w_c/q0 keeps the mixed effect probability
        # above w_c while the c-reaching part keeps Pr(reach c) > 0
        lam = (ONE + w_c / q0) / 2
        _, creach = max_reach_prob(cm, {first})
        mr = _detau(canon, convex_combine(cm, qmax, creach, lam))
    else:
        mr = _conserving_to_c(canon, qv, first)
    fm = _fold_unfolded_scheduler(m, cause, eff, c,
                                  lift_witness(um, smap, mr))
    replay = replay_pr(m, fm, cause, eff, first=c)
    cond = replay["conditional_first"]
    bad = (cond is not None and replay["p_first"] > 0
           and (cond <= replay["p_eff"] if strict
                else cond < replay["p_eff"]))
    if not bad:
        raise ContractError("internal: lifted witness does not replay the "
                            "per-state violation at %r" % (c,))
    return PrWitness(mr, fm, replay)


# -- the global condition ---------------------------------------------------


class QuadraticSystem:
    """Feasibility system over expected state-action frequencies of the
    canonical model: nonnegativity and flow balance cut out exactly the
    memoryless randomized schedulers; one quadratic inequality states
    that the scheduler violates the probability-raising condition and
    one strict inequality that it reaches the cause at all.

    Variables range over the reachable non-terminal state-action pairs;
    unreachable pairs carry frequency zero under every scheduler.
    """

    def __init__(self, cm, inequality="strict"):
        if inequality not in ("strict", "non-strict"):
            raise ContractError("inequality must be 'strict' or 'non-strict'")
        self.cm = cm
        self.inequality = inequality
        m = cm.mdp
        reach = set(m.reachable_states())
        self.pairs = [(s, a) for s in m.states
                      if s in reach and not m.is_terminal(s)
                      for a in m.actions(s)]
        self._pos = {sa: i for i, sa in enumerate(self.pairs)}
        k = len(self.pairs)
        self.cause_idx = frozenset(
            i for i, (s, _) in enumerate(self.pairs) if s in cm.cause)
        if cm.cause and not self.cause_idx:
            raise ContractError("internal: cause unreachable in canonical "
                                "model despite minimality")
        self.wvec = [cm.w[s] if i in self.cause_idx else ZERO
                     for i, (s, _) in enumerate(self.pairs)]
        self.evec = [m.prob(s, a, cm.eff_unc) for (s, a) in self.pairs]
        # flow balance: visits of s equal inflow, plus one at init
        self.flow = []
        self.flow_rhs = []
        states = [s for s in m.states
                  if s in reach and not m.is_terminal(s)]
        for s in states:
            row = [ZERO] * k
            for a in m.actions(s):
                row[self._pos[(s, a)]] += ONE
            for (t, a) in self.pairs:
                p = m.prob(t, a, s)
                if p > 0:
                    row[self._pos[(t, a)]] -= p
            self.flow.append(row)
            self.flow_rhs.append(ONE if s == m.init else ZERO)

    def cause_mass(self, x):
        return sum((x[i] for i in self.cause_idx), ZERO)

    def violation_value(self, x):
        """Left side of the violation inequality: nonpositive iff the
        frequency vector's scheduler fails to raise the probability."""
        xc = self.cause_mass(x)
        tp = sum((w * xi for w, xi in zip(self.wvec, x)), ZERO)
        pe = sum((e * xi for e, xi in zip(self.evec, x)), ZERO)
        return (ONE - xc) * tp - xc * pe

    def check(self, x):
        if any(xi < 0 for xi in x):
            return False
        for row, b in zip(self.flow, self.flow_rhs):
            if sum((r * xi for r, xi in zip(row, x)), ZERO) != b:
                return False
        xc = self.cause_mass(x)
        if not xc > 0:
            return False
        v = self.violation_value(x)
        return v <= 0 if self.inequality == "strict" else v < 0


def build_quadratic_system(cm, inequality="strict"):
    return QuadraticSystem(cm, inequality=inequality)


def _vector_to_freq(qs, x):
    pair = {}
    state = {}
    for (sa, xi) in zip(qs.pairs, x):
        pair[sa] = xi
        state[sa[0]] = state.get(sa[0], ZERO) + xi
    return FrequencyVector(pair, state)


def _freqs_as_vector(qs, fv):
    return [fv.of_pair(s, a) for (s, a) in qs.pairs]


def _affine(c0, basis, vec, off=ZERO):
    """Coefficients of an affine functional vec.v + off along h(z)."""
    base = sum((v * c for v, c in zip(vec, c0)), ZERO) + off
    lin = [sum((v * c for v, c in zip(vec, b)), ZERO) for b in basis]
    return base, lin


def _face_candidate(qs, zero_set):
    """Candidate solution on the face where the given variables vanish:
    the unique point of the face's affine hull if it is a point, else
    the stationary point of the violation value on that hull."""
    k = len(qs.pairs)
    cols = [i for i in range(k) if i not in zero_set]
    nc = len(cols)
    mat = []
    rhs = []
    for row, b in zip(qs.flow, qs.flow_rhs):
        mat.append([row[i] for i in cols] + [ZERO])
        rhs.append(b)
    t6 = [ONE if i in qs.cause_idx else ZERO for i in cols] + [-ONE]
    mat.append(t6)
    rhs.append(ZERO)
    aff = linalg.affine_solution_space(mat, rhs)
    if aff is None:
        return None
    c0, basis = aff
    if basis:
        wcol = [qs.wvec[i] for i in cols] + [ZERO]
        ecol = [qs.evec[i] for i in cols] + [ZERO]
        ccol = [ZERO] * nc + [ONE]
        tp0, tp = _affine(c0, basis, wcol)
        pe0, pe = _affine(c0, basis, ecol)
        xc0, xc = _affine(c0, basis, ccol)
        s0 = tp0 + pe0
        sv = [a + b for a, b in zip(tp, pe)]
        r = len(basis)
        grad = [[xc[i] * sv[j] + sv[i] * xc[j] for j in range(r)]
                for i in range(r)]
        grhs = [tp[i] - xc[i] * s0 - xc0 * sv[i] for i in range(r)]
        kind, z = linalg.solve_classified(grad, grhs)
        if kind != "unique":
            return None
        v = list(c0)
        for j, zj in enumerate(z):
            for i in range(nc + 1):
                v[i] += zj * basis[j][i]
    else:
        v = list(c0)
    full = [ZERO] * k
    for pos, i in enumerate(cols):
        full[i] = v[pos]
    return full


def solve_quadratic_system(qs, budget=None):
    """Feasible frequency vector of the violation system, or None.

    Tries two cheap verified candidates first (the cause-maximizing
    deterministic scheduler and the uniformly randomizing one), then
    enumerates faces of the flow polytope by ascending zero-set size.
    On every face the violation value is a quadratic along the face's
    affine hull; its minimum over the polytope is attained either at a
    hull that is a single point or at a stationary point of such a
    quadratic, so checking those candidates decides feasibility.  All
    candidates are verified against the original constraints before
    being returned, so a returned vector is always a true solution.
    """
    if budget is None:
        budget = int(os.environ.get("PRCAUSE_BUDGET", DEFAULT_BUDGET))
    cm = qs.cm
    m = cm.mdp
    _, md = max_reach_prob(m, cm.cause)
    x = _freqs_as_vector(qs, scheduler_frequencies(m, md))
    if qs.check(x):
        return _vector_to_freq(qs, x)
    uniform = MrScheduler(
        {s: {a: Fraction(1, len(m.actions(s))) for a in m.actions(s)}
         for s in m.nonterminal_states()})
    x = _freqs_as_vector(qs, scheduler_frequencies(m, uniform))
    if qs.check(x):
        return _vector_to_freq(qs, x)
    k = len(qs.pairs)
    examined = 0
    for size in range(k + 1):
        for subset in itertools.combinations(range(k), size):
            examined += 1
            if examined > budget:
                raise UndecidedError(
                    "zero-set enumeration stopped after %d candidates "
                    "(budget %d): undecided at this scale" % (examined - 1,
                                                              budget))
            zs = frozenset(subset)
            if qs.cause_idx <= zs:
                continue
            cand = _face_candidate(qs, zs)
            if cand is not None and qs.check(cand):
                return _vector_to_freq(qs, cand)
    return None


def _freq_to_mr(canon, fv):
    """Memoryless scheduler whose frequencies match a feasible vector;
    states the vector never visits get an arbitrary fixed choice."""
    m = canon.mdp
    choice = {}
    for s in m.nonterminal_states():
        tot = fv.of_state(s)
        if tot > 0:
            choice[s] = {a: fv.of_pair(s, a) / tot for a in m.actions(s)
                         if fv.of_pair(s, a) > 0}
        else:
            choice[s] = {m.actions(s)[0]: ONE}
    return MrScheduler(choice)


def _canonical_metrics(cm, u):
    """Cause probability and the violation value a scheduler realizes
    on the canonical model."""
    chain = induced_chain(cm.mdp, as_fm(u))
    pc = ZERO
    tp = ZERO
    for c in cm.cause:
        hit = {cs for cs in chain.states if cs[1] == c}
        p = chain_reach_values(chain, hit)[chain.init] if hit else ZERO
        pc += p
        tp += p * cm.w[c]
    unc = {cs for cs in chain.states if cs[1] == cm.eff_unc}
    pe = chain_reach_values(chain, unc)[chain.init] if unc else ZERO
    return pc, (ONE - pc) * tp - pc * pe


def _violates(pc, value, strict):
    if strict:
        return pc > 0 and value <= 0
    return value < 0


def round_tau_witness(cm, u, strict=True):
    """Make the stay-forever choices of a violating MR scheduler
    deterministic without losing the violation.

    The violation value as a function of one state's stay probability
    is a quadratic whose maximum over the unit interval sits at an
    endpoint, so per state (in declaration order) it suffices to test
    the stay endpoint exactly and otherwise rescale the exits.
    """
    pc, value = _canonical_metrics(cm, u)
    if not _violates(pc, value, strict):
        raise ContractError(
            "scheduler does not violate the probability-raising inequality")
    maps = cm.state_map
    current = {s: dict(u.dist(s)) for s in cm.mdp.nonterminal_states()}
    for s in sorted(maps.mec_members, key=cm.mdp.index):
        esc = _escape_label(maps, s, cm.mdp.actions(s))
        wt = current[s].get(esc, ZERO)
        if not ZERO < wt < ONE:
            continue
        stay = {esc: ONE}
        cand = dict(current)
        cand[s] = stay
        pc0, v0 = _canonical_metrics(cm, MrScheduler(cand))
        if _violates(pc0, v0, strict):
            current[s] = stay
            continue
        row = dict(current[s])
        row.pop(esc)
        scale = ONE / (ONE - wt)
        current[s] = {a: p * scale for a, p in row.items()}
        pc1, v1 = _canonical_metrics(cm, MrScheduler(current))
        if not _violates(pc1, v1, strict):
            raise ContractError("internal: deterministic stay rounding lost "
                                "the violation at %r" % (s,))
    return MrScheduler(current)


# -- lifting a canonical witness back to the original model -----------------


def _stay_action(n, members, s):
    for a in n.actions(s):
        if all(t in members for t in n.successors(s, a)):
            return a
    raise ContractError("no internal action at %r" % (s,))


def _component_plan(n, maps, w):
    """Split collapsed components by what the canonical witness does:
    exit chains for components it leaves, stay policies for components
    it remains in forever."""
    chains = {}
    stay = {}
    for name, members in maps.mec_members.items():
        dist = w.dist(name)
        exit_labels = {a for (sup, a) in maps.exit_pairs if sup == name}
        esc_weight = sum((p for a, p in dist.items()
                          if a not in exit_labels), ZERO)
        if esc_weight == ONE:
            stay[name] = {s: _stay_action(n, members, s) for s in members}
            continue
        if esc_weight != ZERO:
            raise ContractError(
                "witness stay choice at %r is not deterministic" % (name,))
        exits = []
        for label, p in dist.items():
            u, a = maps.exit_pairs[(name, label)]
            exits.append((u, a, p))
        exits.sort(key=lambda e: (n.index(e[0]), str(e[1])))
        offers = []
        rem = ONE
        for (u, a, p) in exits:
            offers.append((u, a, p / rem))
            rem -= p
        chains[name] = offers
    return chains, stay


def _chain_frequencies(n, maps, w, chains, stay):
    """State-action frequencies on the pre-quotient model of a
    finite-memory scheduler replaying the canonical witness: between
    components it copies w; inside a left component it offers the exits
    in order with the residual-normalized probabilities, navigating to
    each exit state in turn."""
    home = {}
    for name in chains:
        for s in maps.mec_members[name]:
            home[s] = name
    stay_members = {}
    for name in stay:
        for s in maps.mec_members[name]:
            stay_members[s] = name

    nav_cache = {}

    def nav(name, goal):
        key = (name, goal)
        if key not in nav_cache:
            nav_cache[key] = navigate_policy(
                n, maps.mec_members[name], goal)
        return nav_cache[key]

    modes = ["md"]
    choice = {}
    keep = {}
    for s in n.nonterminal_states():
        if s in home:
            continue
        if s in stay_members:
            choice[("md", s)] = {stay[stay_members[s]][s]: ONE}
        else:
            choice[("md", s)] = dict(w.dist(s))
    for name, offers in chains.items():
        k = len(offers)
        members = maps.mec_members[name]
        for i in range(1, k + 1):
            mode = ("chain", name, i)
            modes.append(mode)
            s_i = offers[i - 1][0]
            for s in sorted(members, key=n.index):
                if s != s_i:
                    a = nav(name, s_i)[s]
                    choice[(mode, s)] = {a: ONE}
                    keep[(mode, s, a)] = mode
                    continue
                row = {}
                run = ONE
                j = i
                while j <= k and offers[j - 1][0] == s:
                    _, act, qj = offers[j - 1]
                    row[act] = row.get(act, ZERO) + run * qj
                    run *= ONE - qj
                    j += 1
                if run > 0:
                    if j > k:
                        raise ContractError(
                            "internal: leftover exit mass at %r" % (name,))
                    goal = offers[j - 1][0]
                    a = nav(name, goal)[s]
                    row[a] = row.get(a, ZERO) + run
                    keep[(mode, s, a)] = ("chain", name, j)
                choice[(mode, s)] = row

    def entry(t):
        if t in home:
            return ("chain", home[t], 1)
        return "md"

    def switch(mode, s, a, t):
        return keep.get((mode, s, a), entry(t))

    init_mode = entry(n.init)
    fm = FmScheduler(modes, init_mode, choice, switch)
    chain = induced_chain(n, fm)
    absorbing = {cs for cs in chain.states if cs[1] in stay_members}
    visits = chain_expected_visits(chain, absorbing=absorbing)
    pair = {}
    state = {}
    for cs, count in visits.items():
        mode, s = cs
        if n.is_terminal(s) or cs in absorbing:
            continue
        for a, wt in fm.dist(mode, s).items():
            key = (s, a)
            pair[key] = pair.get(key, ZERO) + count * wt
            state[s] = state.get(s, ZERO) + count * wt
    return pair, state, stay_members


def lift_witness(original, maps, w, cause=None, eff=None):
    """Two-mode scheduler on the original model replaying a canonical
    witness: before the cause it follows a memoryless scheduler whose
    frequencies match the witness played through the collapsed
    components (so all terminal probabilities agree); from the first
    cause state on it minimizes the effect probability, realizing
    exactly the minimal split the transform assigned to that state."""
    if cause is None:
        cause = maps.designated["cause"]
    if eff is None:
        eff = maps.designated["eff"]
    cause = frozenset(cause)
    eff = frozenset(eff)
    n, _ = wmin_cause(original, cause, eff)
    chains, stay = _component_plan(n, maps, w)
    pair, state, stay_members = _chain_frequencies(n, maps, w, chains, stay)
    before = {}
    for s in original.nonterminal_states():
        if s in cause:
            continue
        if s in stay_members:
            before[("before", s)] = {stay[stay_members[s]][s]: ONE}
        elif state.get(s, ZERO) > 0:
            tot = state[s]
            before[("before", s)] = {
                a: pair[(s, a)] / tot for a in original.actions(s)
                if pair.get((s, a), ZERO) > 0}
        else:
            before[("before", s)] = {original.actions(s)[0]: ONE}
    _, mdmin = min_reach_prob(original, eff)
    after = {("after", s): {mdmin.act(s): ONE}
             for s in original.nonterminal_states()}
    before.update(after)
    init_mode = "after" if original.init in cause else "before"
    return FmScheduler.from_moore(
        ("before", "after"), init_mode, before,
        lambda mode, t: "after" if t in cause else mode)


def check_gpr(q, relaxed_minimality=False, budget=None):
    """Global condition: the cause fails iff the violation system over
    canonical frequency vectors is feasible; a feasible vector is
    turned into a deterministic-stay MR witness and lifted."""
    if q.strictness != "gpr":
        raise ContractError("query strictness is %r, expected gpr"
                            % (q.strictness,))
    cause, viol, early = _minimality_gate(q, relaxed_minimality)
    if early is not None:
        return early
    canon, smap = canonical_form(q.model, cause, q.eff)
    qs = build_quadratic_system(canon, inequality=q.inequality)
    sol = solve_quadratic_system(qs, budget=budget)
    if sol is None:
        return CauseVerdict(True, minimality_failures=viol)
    u = round_tau_witness(canon, _freq_to_mr(canon, sol), strict=q.strict)
    fm = lift_witness(q.model, smap, u)
    replay = replay_pr(q.model, fm, cause, q.eff)
    cond = replay["conditional"]
    bad = (cond is not None
           and (cond <= replay["p_eff"] if q.strict
                else cond < replay["p_eff"]))
    if not bad:
        raise ContractError(
            "internal: lifted witness does not replay the global violation")
    return CauseVerdict(False, minimality_failures=viol,
                        refuting_witness=PrWitness(u, fm, replay),
                        violated_condition=("G", None))


def check_gpr_mc(q):
    """Global condition on a Markov chain by direct computation on the
    two-copy split along the first cause visit."""
    if q.strictness != "gpr":
        raise ContractError("query strictness is %r, expected gpr"
                            % (q.strictness,))
    m = q.model
    if not m.is_mc:
        raise ContractError("model is not a Markov chain")
    split, _ = cause_split(m, q.cause)
    vals_eff, _ = max_reach_prob(
        split, {cs for cs in split.states if cs[0] in q.eff})
    vals_cov, _ = max_reach_prob(
        split, {cs for cs in split.states if cs[0] in q.eff and cs[1] == 1})
    vals_cause, _ = max_reach_prob(
        split, {cs for cs in split.states if cs[0] in q.cause})
    p_eff = vals_eff[split.init]
    p_cov = vals_cov[split.init]
    p_cause = vals_cause[split.init]
    if p_cause == 0:
        raise ContractError("no path reaches the cause; the conditional "
                            "probability is undefined")
    cond = p_cov / p_cause
    ok = cond > p_eff if q.strict else cond >= p_eff
    replay = {"p_eff": p_eff, "p_cause": p_cause, "p_both": p_cov,
              "conditional": cond}
    if ok:
        return CauseVerdict(True)
    sole = MdScheduler({s: m.single_action(s)
                        for s in m.nonterminal_states()})
    return CauseVerdict(False,
                        refuting_witness=PrWitness(None, sole, replay),
                        violated_condition=("G", None))
