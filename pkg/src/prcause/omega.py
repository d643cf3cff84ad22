"""Automaton-shaped causes and effects.

Effects may be given as deterministic Rabin automata reading state
names, causes either as plain state sets or as prefix-free DFAs whose
accepted words are the minimal good prefixes of a co-safety property.
Both settings reduce to reachability on a before/after product: build
the product, split it at the moment the cause occurs, collapse end
components into capability edges onto four fresh terminals (effect
covered / uncovered, no effect with / without cause), and hand the
result to the state-based checking and quality machinery.  Runs of the
original model and of the transform realize the same confusion
matrices, so verdicts and measures carry over exactly.
"""

import itertools

from fractions import Fraction

from . import graph
from .checking import CauseQuery, CauseVerdict, check_gpr, check_spr
from .errors import ContractError, UndecidedError
from .model import Mdp
from .optimal import OptimalResult, _budget_limit
from .quality import fscore_canonical, recall_covratio_canonical
from .reach import max_constrained_reach, min_reach_prob
from .transforms import StateMap, _product, mec_quotient, product_dra

ZERO = Fraction(0)
ONE = Fraction(1)

MEASURES = ("recall", "covratio", "fscore")


class RegularTransform:
    """Four-terminal reachability model standing in for an automaton
    question.

    Duck-typed like CanonicalMdp where the quality helpers look:
    `mdp`, `cause` and the four terminal names.  `cause` holds the
    product states at which the cause has just occurred; for state-set
    causes `cause_sets` splits them by originating state (possibly
    empty per state), for DFA causes `dfa_components` records each
    cause state's automaton component.  `annotations` stores, per
    collapsed end component, whether acceptance was achievable almost
    surely and whether it was avoidable almost surely.
    """

    def __init__(self, mdp, cause, cause_sets, eff_cov, eff_unc,
                 noeff_fp, noeff_tn, state_map, components, annotations,
                 dfa_components=None):
        self.mdp = mdp
        self.cause = frozenset(cause)
        self.cause_sets = cause_sets
        self.eff_cov = eff_cov
        self.eff_unc = eff_unc
        self.noeff_fp = noeff_fp
        self.noeff_tn = noeff_tn
        self.state_map = state_map
        self.components = components
        self.annotations = annotations
        self.dfa_components = dfa_components

    @property
    def eff(self):
        return frozenset((self.eff_cov, self.eff_unc))

    def __repr__(self):
        return "RegularTransform(%d states, %d cause states)" % (
            len(self.mdp.states), len(self.cause))


class CosafetyVerdict:
    """Outcome of the strict co-safety check: 'no' is a sound
    refutation, 'yes' only arises for Markov chains where the
    per-prefix conditionals decide the condition exactly, 'unknown'
    means the necessary per-state check on the transform passed
    without settling the question."""

    def __init__(self, status, p_eff=None, conditionals=None,
                 violations=(), transform_verdict=None, transform=None):
        self.status = status
        self.p_eff = p_eff
        self.conditionals = dict(conditionals or {})
        self.violations = tuple(violations)
        self.transform_verdict = transform_verdict
        self.transform = transform

    def __repr__(self):
        return "CosafetyVerdict(%r)" % (self.status,)


def qualitative_rabin(mec, pairs, model):
    """Capabilities of one maximal end component: can a scheduler that
    never leaves it make the Rabin condition hold almost surely, and
    can one make it fail almost surely?

    Staying runs sweep some sub-component, so acceptance needs a
    sub-component avoiding an L_i while touching the matching K_i, and
    rejection needs one where every pair either keeps touching L_i or
    avoids K_i entirely.
    """
    can1 = False
    for l, k in pairs:
        core = [s for s in mec.states if s not in l]
        for sub in _component_mecs(model, core, mec.actions_of):
            if sub.states & k:
                can1 = True
                break
        if can1:
            break
    can0 = _rejecting_component(model, mec.states, mec.actions_of, pairs)
    return can1, can0


def _component_mecs(model, states, avail):
    keep = set(states)
    acts = {}
    for s in keep:
        acts[s] = tuple(a for a in avail(s)
                        if all(t in keep for t in model.successors(s, a)))
    sub = graph.SubModel(sorted(keep, key=model.index),
                         lambda s: acts[s], model.successors)
    return graph.mec_decompose(sub)


def _rejecting_component(model, states, avail, pairs):
    for sub in _component_mecs(model, states, avail):
        bad = [j for j, (l, k) in enumerate(pairs)
               if not (sub.states & l) and (sub.states & k)]
        if not bad:
            return True
        cut = set()
        for j in bad:
            cut |= pairs[j][1]
        rest = [s for s in sub.states if s not in cut]
        if _rejecting_component(model, rest, sub.actions_of, pairs):
            return True
    return False


def _loop_terminals(m):
    """Self-loop every terminal state so that all runs are infinite and
    the automata keep reading the terminal's name."""
    trans = m.trans_map()
    for t in m.terminal_states():
        trans[t] = {"stay": {t: ONE}}
    return Mdp(m.states, m.init, trans, kind=m.kind)


def _mode_split(m, trigger):
    """Two-copy model of a terminal-free MDP: bit 0 before the first
    trigger visit and bit 1 strictly afterwards.  The trigger state
    itself stays in copy 0; only its successors move on, so a run
    meets at most one copy-0 trigger state."""
    trigger = set(trigger)
    start = (m.init, 0)
    order = []
    trans = {}
    seen = {start}
    queue = [start]
    while queue:
        cs = queue.pop(0)
        order.append(cs)
        x, bit = cs
        nbit = 1 if (bit == 1 or x in trigger) else 0
        row = {}
        for a in m.actions(x):
            dist = {}
            for t, p in m.dist(x, a).items():
                nxt = (t, nbit)
                dist[nxt] = p
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
            row[a] = dist
        trans[cs] = row
    names = {}
    used = set()
    for cs in order:
        base = "%s#%d" % cs
        while base in used:
            base += "'"
        names[cs] = base
        used.add(base)
    states = [names[cs] for cs in order]
    named = {}
    for cs, row in trans.items():
        named[names[cs]] = {a: {names[t]: p for t, p in dist.items()}
                            for a, dist in row.items()}
    out = Mdp(states, names[start], named, kind=m.kind)
    components = {names[cs]: cs for cs in order}
    return out, components


def _fresh(used, base):
    name = base
    n = 0
    while name in used:
        n += 1
        name = "%s_%d" % (base, n)
    used.add(name)
    return name


def _fresh_action(row, base):
    name = base
    while name in row:
        name += "'"
    return name


def _four_terminal(prod, pairs, trigger, orig_of):
    """Split `prod` at the trigger states, quotient the end components
    and replace each component's escape by capability edges onto four
    fresh terminals, chosen by copy index and by whether acceptance is
    achievable / avoidable almost surely inside the component."""
    split, comp = _mode_split(prod, trigger)
    lifted = []
    for l, k in pairs:
        lifted.append(
            (frozenset(y for y in split.states if comp[y][0] in l),
             frozenset(y for y in split.states if comp[y][0] in k)))
    cause = frozenset(y for y in split.states
                      if comp[y][1] == 0 and comp[y][0] in trigger)
    mecs = graph.mec_decompose(split)
    for mec in mecs:
        if mec.states & cause:
            raise ContractError("cause state trapped in an end component")
    by_members = {mec.states: mec for mec in mecs}
    quot, qmap = mec_quotient(split)
    bottom = qmap.designated["bottom"]
    trans = quot.trans_map()
    used = set(quot.states)
    eff_cov = _fresh(used, "eff_cov")
    eff_unc = _fresh(used, "eff_unc")
    noeff_fp = _fresh(used, "noeff_fp")
    noeff_tn = _fresh(used, "noeff_tn")
    annotations = {}
    for name in sorted(qmap.mec_members, key=quot.index):
        members = qmap.mec_members[name]
        mec = by_members[frozenset(members)]
        can1, can0 = qualitative_rabin(mec, lifted, split)
        bit = comp[next(iter(members))][1]
        row = trans[name]
        for a in list(row):
            if row[a] == {bottom: ONE}:
                del row[a]
                break
        hit = eff_cov if bit else eff_unc
        miss = noeff_fp if bit else noeff_tn
        if can1:
            row[_fresh_action(row, "accept")] = {hit: ONE}
        if can0:
            row[_fresh_action(row, "reject")] = {miss: ONE}
        annotations[name] = (can1, can0)
    states = [s for s in quot.states if s != bottom]
    states += [eff_cov, eff_unc, noeff_fp, noeff_tn]
    kind = "mc" if prod.kind == "mc" else "mdp"
    out = Mdp(states, quot.init, trans, kind=kind, allow_unreachable=True)

    components = {}
    fibers = {}
    for y in split.states:
        img = qmap.image(y)
        if img == y:
            components[y] = comp[y]
        s = orig_of(comp[y][0])
        row = fibers.setdefault(s, [])
        if img not in row:
            row.append(img)
    fresh = {name: "mec" for name in qmap.mec_members}
    fresh.update({eff_cov: "eff_cov", eff_unc: "eff_unc",
                  noeff_fp: "noeff_fp", noeff_tn: "noeff_tn"})
    smap = StateMap(fibers, fresh=fresh, mec_members=qmap.mec_members,
                    designated={"eff_cov": eff_cov, "eff_unc": eff_unc,
                                "noeff_fp": noeff_fp, "noeff_tn": noeff_tn},
                    components=components)
    return out, cause, smap, annotations, components


def regular_effect_transform(m, a, cause):
    """Product with the effect automaton, split at the cause states,
    end components collapsed into capability edges (copy 0 feeds
    eff_unc / noeff_tn, copy 1 feeds eff_cov / noeff_fp)."""
    cause = set(cause)
    for c in cause:
        if not m.has_state(c):
            raise ContractError("unknown cause state %r" % (c,))
    looped = _loop_terminals(m)
    prod, pairs, pmap = product_dra(looped, a)
    trigger = {x for x in prod.states if pmap.components[x][0] in cause}
    out, cause_names, smap, notes, comps = _four_terminal(
        prod, pairs, trigger, lambda x: pmap.components[x][0])
    cause_sets = {}
    for c in sorted(cause, key=m.index):
        cause_sets[c] = frozenset(
            y for y in cause_names
            if pmap.components[comps[y][0]][0] == c)
    return RegularTransform(out, cause_names, cause_sets,
                            smap.designated["eff_cov"],
                            smap.designated["eff_unc"],
                            smap.designated["noeff_fp"],
                            smap.designated["noeff_tn"],
                            smap, comps, notes)


class _SymbolLift:
    """Feeds a DFA the original state name hidden inside a product
    state name, so a second product can run over the first."""

    def __init__(self, dfa, components):
        self.q0 = dfa.q0
        self._dfa = dfa
        self._components = components

    def step(self, q, name):
        return self._dfa.step(q, self._components[name][0])


def cosafety_transform(m, a, c):
    """Triple product with the effect automaton and the prefix-free
    cause automaton, split at the states whose cause component accepts.
    Prefix-freeness guarantees a run meets at most one such state."""
    if not c.is_prefix_free():
        raise ContractError(
            "cause automaton must accept a prefix-free language")
    looped = _loop_terminals(m)
    md, pairs, pmap = product_dra(looped, a)
    prod, map2 = _product(md, _SymbolLift(c, pmap.components))
    lifted = []
    for l, k in pairs:
        lifted.append(
            (frozenset(y for y in prod.states if map2.components[y][0] in l),
             frozenset(y for y in prod.states if map2.components[y][0] in k)))
    trigger = {y for y in prod.states
               if map2.components[y][1] in c.accepting}

    def orig_of(x):
        return pmap.components[map2.components[x][0]][0]

    out, cause_names, smap, notes, comps = _four_terminal(
        prod, lifted, trigger, orig_of)
    dfa_components = {y: map2.components[comps[y][0]][1]
                      for y in cause_names}
    return RegularTransform(out, cause_names, None,
                            smap.designated["eff_cov"],
                            smap.designated["eff_unc"],
                            smap.designated["noeff_fp"],
                            smap.designated["noeff_tn"],
                            smap, comps, notes,
                            dfa_components=dfa_components)


def _temp_prio_sets(tr):
    can_miss = graph.backward_reachable(
        {tr.noeff_fp}, tr.mdp.states, tr.mdp.all_successors)
    return {c: bool(ys & can_miss) for c, ys in tr.cause_sets.items()}


def _check_nonempty_cause(cause):
    cause = frozenset(cause)
    if not cause:
        raise ContractError("cause set is empty")
    return cause


def _omega_gates(tr, relaxed_minimality, tempprio):
    if not relaxed_minimality:
        missing = frozenset(c for c, ys in tr.cause_sets.items() if not ys)
        if missing:
            return CauseVerdict(False, minimality_failures=missing,
                                violated_condition=("minimality", missing))
    if not tr.cause:
        raise ContractError("no cause state is reachable in the product")
    if tempprio:
        flags = _temp_prio_sets(tr)
        bad = frozenset(c for c, ok in flags.items() if not ok)
        if bad:
            return CauseVerdict(False, violated_condition=("tempprio", bad))
    return None


def check_reachability_gpr(m, a, cause, strict=True,
                           relaxed_minimality=False, tempprio=False,
                           budget=None):
    """GPR verdict for a state-set cause against an automaton effect:
    the cause front on the transform must be a GPR cause for reaching
    the two effect terminals."""
    cause = _check_nonempty_cause(cause)
    tr = regular_effect_transform(m, a, cause)
    gate = _omega_gates(tr, relaxed_minimality, tempprio)
    if gate is not None:
        gate.transform = tr
        return gate
    q = CauseQuery(tr.mdp, tr.cause, tr.eff, "gpr",
                   "strict" if strict else "non-strict")
    verdict = check_gpr(q, budget=budget)
    verdict.transform = tr
    return verdict


def check_reachability_spr(m, a, cause, strict=True,
                           relaxed_minimality=False, tempprio=False,
                           budget=None):
    """SPR verdict for a state-set cause against an automaton effect:
    every cause state's first-visit front must, on its own, be a GPR
    cause on the shared transform."""
    cause = _check_nonempty_cause(cause)
    tr = regular_effect_transform(m, a, cause)
    gate = _omega_gates(tr, relaxed_minimality, tempprio)
    if gate is not None:
        gate.transform = tr
        return gate
    ineq = "strict" if strict else "non-strict"
    for c in sorted(cause, key=m.index):
        sub = tr.cause_sets[c]
        if not sub:
            continue
        q = CauseQuery(tr.mdp, sub, tr.eff, "gpr", ineq)
        verdict = check_gpr(q, budget=budget)
        if not verdict:
            out = CauseVerdict(False,
                               refuting_witness=verdict.refuting_witness,
                               violated_condition=("S", c))
            out.transform = tr
            return out
    out = CauseVerdict(True)
    out.transform = tr
    return out


def temp_prio_check(m, a, cause):
    """For each cause state: once the cause has just occurred there,
    is missing the effect still possible?"""
    cause = _check_nonempty_cause(cause)
    tr = regular_effect_transform(m, a, cause)
    return _temp_prio_sets(tr)


def _transform_quality(tr, measure):
    if measure in ("recall", "covratio"):
        recall, cov, wit = recall_covratio_canonical(tr, tr.state_map)
        return (recall if measure == "recall" else cov), wit
    if measure == "fscore":
        return fscore_canonical(tr, tr.state_map)
    raise ContractError("unknown measure %r" % (measure,))


def _quality_gates(tr, cause, assume_cause, tempprio):
    if tempprio:
        can_miss = graph.backward_reachable(
            {tr.noeff_fp}, tr.mdp.states, tr.mdp.all_successors)
        if tr.cause_sets is not None:
            bad = sorted(c for c, ys in tr.cause_sets.items()
                         if ys and not (ys & can_miss))
        else:
            bad = sorted(y for y in tr.cause if y not in can_miss)
        if bad:
            raise ContractError(
                "effect already certain once the cause occurs (%s); pass "
                "tempprio=False to score anyway" %
                ", ".join(str(b) for b in bad))
    if not assume_cause:
        q = CauseQuery(tr.mdp, tr.cause, tr.eff, "gpr", "strict")
        if not check_gpr(q):
            raise ContractError(
                "quality measures are defined for probability-raising "
                "causes only; %s is not one" % (sorted(map(str, cause)),))


def reachability_quality(m, a, cause, measure, assume_cause=False,
                         tempprio=True):
    """Worst-case quality of a state-set cause for an automaton effect,
    measured on the transform; returns the value and the witnessing
    scheduler."""
    cause = _check_nonempty_cause(cause)
    tr = regular_effect_transform(m, a, cause)
    missing = sorted(c for c, ys in tr.cause_sets.items() if not ys)
    if missing:
        raise ContractError(
            "cause states unreachable as first cause visit: %s"
            % ", ".join(str(c) for c in missing))
    _quality_gates(tr, cause, assume_cause, tempprio)
    return _transform_quality(tr, measure)


def canonical_reachability_cause(m, a, budget=None):
    """Front of the states that alone raise the automaton effect's
    probability and keep it avoidable; ratio- and recall-optimal among
    the causes respecting that condition.  None when no state
    qualifies."""
    passing = []
    for s in m.states:
        tr = regular_effect_transform(m, a, {s})
        if not tr.cause:
            continue
        if not _temp_prio_sets(tr)[s]:
            continue
        q = CauseQuery(tr.mdp, tr.cause, tr.eff, "gpr", "strict")
        if check_gpr(q, budget=budget):
            passing.append(s)
    if not passing:
        return None
    front = frozenset(c for c in passing
                      if max_constrained_reach(m, set(passing), c) > 0)
    tr = regular_effect_transform(m, a, front)
    recall, cov, _ = recall_covratio_canonical(tr, tr.state_map)
    return front, recall, cov


def reachability_optimal(m, a, measure, kind="gpr", budget=None):
    """Best state-set cause for an automaton effect by exhaustive
    search over the subsets whose members individually keep the effect
    avoidable; ties go to the candidate with the lexicographically
    smallest state list."""
    if measure not in MEASURES:
        raise ContractError("unknown measure %r" % (measure,))
    kind = str(kind).lower()
    if kind not in ("spr", "gpr"):
        raise ContractError("kind must be 'spr' or 'gpr', got %r" % (kind,))
    limit = _budget_limit(budget)
    universe = []
    for s in m.states:
        tr = regular_effect_transform(m, a, {s})
        if tr.cause and _temp_prio_sets(tr)[s]:
            universe.append(s)
    best = None
    count = 0
    for size in range(1, len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            count += 1
            if count > limit:
                raise UndecidedError(
                    "candidate budget %d exceeded while searching optimal "
                    "causes" % limit)
            cause = frozenset(combo)
            tr = regular_effect_transform(m, a, cause)
            if any(not ys for ys in tr.cause_sets.values()):
                continue
            if not all(_temp_prio_sets(tr).values()):
                continue
            if kind == "gpr":
                ok = check_gpr(CauseQuery(tr.mdp, tr.cause, tr.eff,
                                          "gpr", "strict"), budget=budget)
            else:
                ok = all(check_gpr(CauseQuery(tr.mdp, tr.cause_sets[c],
                                              tr.eff, "gpr", "strict"),
                                   budget=budget)
                         for c in combo)
            if not ok:
                continue
            value = _transform_quality(tr, measure)[0]
            key = tuple(sorted(str(c) for c in cause))
            if (best is None or value > best[0]
                    or (value == best[0] and key < best[1])):
                best = (value, key, cause)
    if best is None:
        return None
    return OptimalResult(best[2], measure, best[0], "enumeration")


def check_cosafety_gpr(m, a, c, strict=True, budget=None):
    """GPR verdict for a co-safety cause: the accepting front of the
    triple product must be a GPR cause for the effect terminals."""
    tr = cosafety_transform(m, a, c)
    if not tr.cause:
        raise ContractError("cause automaton accepts no reachable prefix")
    q = CauseQuery(tr.mdp, tr.cause, tr.eff, "gpr",
                   "strict" if strict else "non-strict")
    verdict = check_gpr(q, budget=budget)
    verdict.transform = tr
    return verdict


def check_cosafety_spr_necessary(m, a, c, strict=True):
    """Sound-but-incomplete strict check for a co-safety cause.

    The accepting front failing the state-based SPR check on the
    transform refutes the condition; passing it proves nothing for
    MDPs because schedulers of the original model may react to how a
    prefix reached its last state.  Markov chains carry no such
    freedom, so there the per-prefix conditionals decide exactly.
    """
    tr = cosafety_transform(m, a, c)
    if not tr.cause:
        raise ContractError("cause automaton accepts no reachable prefix")
    if m.is_mc:
        vals, _ = min_reach_prob(tr.mdp, tr.eff)
        p_eff = vals[tr.mdp.init]
        conds = {u: vals[u] for u in tr.cause}
        viol = sorted(
            (u for u in conds
             if not (conds[u] > p_eff if strict else conds[u] >= p_eff)),
            key=tr.mdp.index)
        return CosafetyVerdict("no" if viol else "yes", p_eff=p_eff,
                               conditionals=conds, violations=viol,
                               transform=tr)
    q = CauseQuery(tr.mdp, tr.cause, tr.eff, "spr",
                   "strict" if strict else "non-strict")
    verdict = check_spr(q)
    if not verdict:
        return CosafetyVerdict("no", transform_verdict=verdict,
                               transform=tr)
    return CosafetyVerdict("unknown", transform_verdict=verdict,
                           transform=tr)


def temp_prio2_check(m, a, c):
    """True when after every accepted prefix the effect can still be
    missed; vacuously true when nothing is accepted."""
    tr = cosafety_transform(m, a, c)
    can_miss = graph.backward_reachable(
        {tr.noeff_fp}, tr.mdp.states, tr.mdp.all_successors)
    return all(y in can_miss for y in tr.cause)


def cosafety_quality(m, a, c, measure, assume_cause=False, tempprio=True):
    """Worst-case quality of a co-safety cause, measured on the triple
    product transform."""
    tr = cosafety_transform(m, a, c)
    if not tr.cause:
        raise ContractError("cause automaton accepts no reachable prefix")
    _quality_gates(tr, sorted(tr.cause, key=tr.mdp.index),
                   assume_cause, tempprio)
    value, _ = _transform_quality(tr, measure)
    return value
