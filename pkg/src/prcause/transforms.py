"""Model transformations.

* wmin_cause rewires every cause state to a single probabilistic action
  realizing its minimal effect probability.
* mec_quotient collapses maximal end components and adds an escape
  action tau to a bottom state.
* canonical_form composes wmin -> terminal renaming -> quotient into a
  four-terminal, EC-free shape that encodes the confusion matrix.
* cause_split / action_causality_mdp build two-copy models.
* product_dra / product_dfa synchronize a model with an automaton that
  reads the visited state names.
"""

from fractions import Fraction

from . import graph
from .errors import ContractError
from .model import Mdp
from .reach import max_constrained_reach, min_reach_prob

ZERO = Fraction(0)
ONE = Fraction(1)

GAMMA = "gamma"
TAU = "tau"


class StateMap:
    """Mapping from source-model states to image-model states.

    fibers(s) lists every image of s (products map one source state to
    many product states); image(s) returns the unique image and raises
    if there are several.  `fresh` tags image states without a source
    preimage; `components` decomposes product states; `mec_members` and
    `exit_pairs` describe collapsed components of a quotient.
    """

    def __init__(self, fibers, fresh=None, exit_pairs=None,
                 mec_members=None, designated=None, components=None):
        self._fibers = {s: tuple(v) for s, v in fibers.items()}
        self.fresh = dict(fresh or {})
        self.exit_pairs = dict(exit_pairs or {})
        self.mec_members = dict(mec_members or {})
        self.designated = dict(designated or {})
        self.components = dict(components or {})
        self._reverse = {}
        for s, images in self._fibers.items():
            for x in images:
                self._reverse.setdefault(x, []).append(s)

    @classmethod
    def unique(cls, forward, **kw):
        return cls({s: (x,) for s, x in forward.items()}, **kw)

    def fibers(self, s):
        return self._fibers[s]

    def image(self, s):
        fib = self._fibers[s]
        if len(fib) != 1:
            raise ContractError("state %r has %d images" % (s, len(fib)))
        return fib[0]

    def preimage(self, x):
        return list(self._reverse.get(x, ()))

    def source_states(self):
        return list(self._fibers)

    def compose(self, other):
        """Map through self, then through other."""
        fibers = {}
        for s in self._fibers:
            out = []
            for mid in self._fibers[s]:
                for x in other._fibers.get(mid, ()):
                    if x not in out:
                        out.append(x)
            fibers[s] = out
        fresh = dict(other.fresh)
        for mid, tag in self.fresh.items():
            for x in other._fibers.get(mid, (mid,)):
                fresh.setdefault(x, tag)
        return StateMap(fibers, fresh=fresh, exit_pairs=other.exit_pairs,
                        mec_members=other.mec_members,
                        designated=other.designated,
                        components=other.components)


def wmin_cause(m, cause, eff):
    """Replace every cause state's choices by one action gamma that
    reaches a fixed effect state with the state's minimal effect
    probability and a fresh non-effect terminal otherwise."""
    cause = set(cause)
    eff = set(eff)
    _check_cause_eff(m, cause, eff)
    vals, _ = min_reach_prob(m, eff)
    eff_star = min(eff, key=m.index)
    noeff_star = m.fresh_name("noeff_w")
    trans = m.trans_map()
    for c in cause:
        w = vals[c]
        trans[c] = {GAMMA: {eff_star: w, noeff_star: ONE - w}}
    states = list(m.states) + [noeff_star]
    out = Mdp(states, m.init, trans, kind=m.kind, allow_unreachable=True)
    forward = {s: s for s in m.states}
    smap = StateMap.unique(
        forward,
        fresh={noeff_star: "noeff_star"},
        designated={"eff_star": eff_star, "noeff_star": noeff_star,
                    "gamma": GAMMA})
    return out, smap


def _check_cause_eff(m, cause, eff):
    for s in cause | eff:
        if not m.has_state(s):
            raise ContractError("unknown state %r" % (s,))
    if not eff:
        raise ContractError("effect set is empty")
    if cause & eff:
        raise ContractError(
            "cause and effect overlap: %s"
            % ", ".join(str(s) for s in sorted(cause & eff, key=str)))
    for t in eff:
        if not m.is_terminal(t):
            raise ContractError("effect state %r is not terminal" % (t,))


def _super_name(m, members, index):
    if all(isinstance(s, str) for s in members):
        base = "+".join(sorted(members, key=m.index))
        return base if not m.has_state(base) else m.fresh_name(base)
    return ("mec", index)


def mec_quotient(m, bottom=None):
    """Collapse each maximal end component to a single state carrying
    its exit actions plus an escape action tau to `bottom` (a fresh
    trap unless an existing terminal is supplied).  The result has no
    end components."""
    mecs = sorted(graph.mec_decompose(m),
                  key=lambda e: min(m.index(s) for s in e.states))
    class_of = {s: s for s in m.states}
    supers = []
    members_of = {}
    for i, mec in enumerate(mecs):
        name = _super_name(m, mec.states, i)
        supers.append(name)
        members_of[name] = frozenset(mec.states)
        for s in mec.states:
            class_of[s] = name
    if bottom is None:
        bottom = m.fresh_name("bottom")
        fresh_bottom = True
    else:
        if not (m.has_state(bottom) and m.is_terminal(bottom)):
            raise ContractError(
                "bottom state %r must be an existing terminal" % (bottom,))
        fresh_bottom = False

    states = []
    placed = set()
    for s in m.states:
        cls = class_of[s]
        if cls not in placed:
            placed.add(cls)
            states.append(cls)
    if fresh_bottom:
        states.append(bottom)

    trans = {}
    exit_pairs = {}
    for s in m.states:
        if class_of[s] != s or m.is_terminal(s):
            continue
        row = {}
        for a in m.actions(s):
            dist = {}
            for t, p in m.dist(s, a).items():
                key = class_of[t]
                dist[key] = dist.get(key, ZERO) + p
            row[a] = dist
        trans[s] = row
    for i, mec in enumerate(mecs):
        name = supers[i]
        members = members_of[name]
        row = {}
        used = set()
        for u in sorted(mec.states, key=m.index):
            for a in m.actions(u):
                if all(t in members for t in m.successors(u, a)):
                    continue
                label = _exit_label(u, a, used)
                used.add(label)
                dist = {}
                for t, p in m.dist(u, a).items():
                    key = class_of[t]
                    dist[key] = dist.get(key, ZERO) + p
                row[label] = dist
                exit_pairs[(name, label)] = (u, a)
        tau = TAU
        while tau in used:
            tau += "'"
        row[tau] = {bottom: ONE}
        trans[name] = row

    out = Mdp(states, class_of[m.init], trans, kind="mdp",
              allow_unreachable=True)
    fresh = {name: "mec" for name in supers}
    if fresh_bottom:
        fresh[bottom] = "bottom"
    smap = StateMap.unique({s: class_of[s] for s in m.states},
                           fresh=fresh, exit_pairs=exit_pairs,
                           mec_members=members_of,
                           designated={"tau": TAU, "bottom": bottom})
    return out, smap


def _exit_label(u, a, used):
    if isinstance(u, str) and isinstance(a, str):
        label = "%s.%s" % (u, a)
        while label in used:
            label += "'"
        return label
    label = ("x", u, a)
    while label in used:
        label = label + ("'",)
    return label


class CanonicalMdp:
    """EC-free model with four designated terminals classifying every
    run: eff_cov (effect after cause), eff_unc (effect without cause),
    noeff_fp (cause but no effect), noeff_tn (neither).

    Every cause state enables exactly the action gamma, splitting
    between eff_cov (probability w_c) and noeff_fp; eff_cov and
    noeff_fp have no other in-edges; tau escapes go to noeff_tn.
    """

    def __init__(self, mdp, cause, w, eff_cov, eff_unc, noeff_fp, noeff_tn,
                 gamma=GAMMA):
        self.mdp = mdp
        self.cause = frozenset(cause)
        self.w = dict(w)
        self.eff_cov = eff_cov
        self.eff_unc = eff_unc
        self.noeff_fp = noeff_fp
        self.noeff_tn = noeff_tn
        self.gamma = gamma
        self._validate()

    def terminals(self):
        return (self.eff_cov, self.eff_unc, self.noeff_fp, self.noeff_tn)

    def _validate(self):
        m = self.mdp
        four = self.terminals()
        if len(set(four)) != 4:
            raise ContractError("designated terminals not pairwise distinct")
        for t in four:
            if not (m.has_state(t) and m.is_terminal(t)):
                raise ContractError("designated state %r missing or not "
                                    "terminal" % (t,))
        for c in self.cause:
            if m.actions(c) != (self.gamma,):
                raise ContractError(
                    "cause state %r does not enable exactly gamma" % (c,))
            dist = m.dist(c, self.gamma)
            if set(dist) - {self.eff_cov, self.noeff_fp}:
                raise ContractError(
                    "gamma at %r leaves the designated terminals" % (c,))
            if dist.get(self.eff_cov, ZERO) != self.w[c]:
                raise ContractError("gamma split at %r does not match w" % (c,))
        for s in m.states:
            for a in m.actions(s):
                for t in m.successors(s, a):
                    if t in (self.eff_cov, self.noeff_fp) \
                            and (s not in self.cause or a != self.gamma):
                        raise ContractError(
                            "%r has a non-gamma in-edge from (%r, %r)"
                            % (t, s, a))
        if graph.mec_decompose(m):
            raise ContractError("canonical model has end components")

    def __repr__(self):
        return "CanonicalMdp(%d states, cause=%s)" % (
            len(self.mdp.states), sorted(map(str, self.cause)))


def canonical_form(m, cause, eff, require_minimal=True):
    """Compose wmin -> terminal renaming -> quotient.

    Renaming sends gamma's effect target to eff_cov and its miss target
    to noeff_fp, merges all other effect states into eff_unc and all
    remaining terminals into noeff_tn; the quotient reuses noeff_tn as
    its escape target.  Verdicts and quality of `cause` are preserved.
    """
    cause = set(cause)
    eff = set(eff)
    _check_cause_eff(m, cause, eff)
    if require_minimal:
        bad = [c for c in sorted(cause, key=m.index)
               if max_constrained_reach(m, cause, c) == 0]
        if bad:
            raise ContractError(
                "cause states unreachable as first cause visit: %s"
                % ", ".join(str(c) for c in bad))
    wm, map1 = wmin_cause(m, cause, eff)
    eff_star = map1.designated["eff_star"]
    noeff_star = map1.designated["noeff_star"]
    w = {c: wm.prob(c, GAMMA, eff_star) for c in cause}

    eff_cov = wm.fresh_name("eff_cov")
    eff_unc = wm.fresh_name("eff_unc")
    noeff_fp = wm.fresh_name("noeff_fp")
    noeff_tn = wm.fresh_name("noeff_tn")
    four = [eff_cov, eff_unc, noeff_fp, noeff_tn]

    def rename_target(s, a, t):
        if s in cause and a == GAMMA:
            return eff_cov if t == eff_star else noeff_fp
        if t in eff:
            return eff_unc
        if t == noeff_star or wm.is_terminal(t):
            return noeff_tn
        return t

    states = [s for s in wm.states if not wm.is_terminal(s)] + four
    trans = {}
    for s in wm.states:
        if wm.is_terminal(s):
            continue
        row = {}
        for a in wm.actions(s):
            dist = {}
            for t, p in wm.dist(s, a).items():
                key = rename_target(s, a, t)
                dist[key] = dist.get(key, ZERO) + p
            row[a] = dist
        trans[s] = row
    renamed = Mdp(states, wm.init, trans, kind=wm.kind,
                  allow_unreachable=True)
    fwd2 = {}
    for s in wm.states:
        if not wm.is_terminal(s):
            fwd2[s] = s
        elif s in eff:
            fwd2[s] = eff_unc
        elif s == noeff_star:
            fwd2[s] = noeff_fp
        else:
            fwd2[s] = noeff_tn
    map2 = StateMap.unique(
        fwd2, fresh={eff_cov: "eff_cov", eff_unc: "eff_unc",
                     noeff_fp: "noeff_fp", noeff_tn: "noeff_tn"})

    quot, map3 = mec_quotient(renamed, bottom=noeff_tn)
    canon = CanonicalMdp(quot, cause, w, eff_cov, eff_unc, noeff_fp,
                         noeff_tn)
    canon.original = m
    canon.wmin_model = wm
    canon.wmin_map = map1
    canon.renamed_model = renamed
    canon.renamed_map = map2
    canon.quotient_map = map3
    smap = map1.compose(map2).compose(map3)
    smap.designated = {
        "eff_cov": eff_cov, "eff_unc": eff_unc, "noeff_fp": noeff_fp,
        "noeff_tn": noeff_tn, "gamma": GAMMA, "tau": TAU,
        "cause": frozenset(cause), "eff": frozenset(eff)}
    canon.state_map = smap
    return canon, smap


def cause_split(m, trigger):
    """Two-copy model: bit 0 until the first visit of a trigger state,
    bit 1 from that visit on (the trigger state itself is in copy 1)."""
    trigger = set(trigger)
    for s in trigger:
        if not m.has_state(s):
            raise ContractError("unknown trigger state %r" % (s,))
    start = (m.init, 1 if m.init in trigger else 0)
    states = []
    trans = {}
    seen = {start}
    queue = [start]
    while queue:
        cs = queue.pop(0)
        states.append(cs)
        s, bit = cs
        row = {}
        for a in m.actions(s):
            dist = {}
            for t, p in m.dist(s, a).items():
                nbit = 1 if (bit == 1 or t in trigger) else 0
                dist[(t, nbit)] = p
            row[a] = dist
            for nxt in dist:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        if row:
            trans[cs] = row
    out = Mdp(states, start, trans, kind=m.kind)
    fibers = {}
    for s in m.states:
        fibers[s] = [cs for cs in states if cs[0] == s]
    smap = StateMap(fibers)
    return out, smap


def action_causality_mdp(m, s, alpha):
    """Fresh initial state branching equally into two full copies of m
    at `s`: one where only `alpha` is enabled there, one where `alpha`
    is disabled.  SPR causality of the copy-0 split state for the union
    of copied effects answers whether taking `alpha` at `s` raises the
    effect probability."""
    if not m.has_state(s):
        raise ContractError("unknown state %r" % (s,))
    if m.is_terminal(s):
        raise ContractError("state %r is terminal" % (s,))
    if alpha not in m.actions(s):
        raise ContractError("action %r not enabled in %r" % (alpha, s))
    if len(m.actions(s)) < 2:
        raise ContractError(
            "action %r is the only choice in %r; the comparison model "
            "would strand the state" % (alpha, s))
    after = graph.reachable_from(m.all_successors(s), m.all_successors)
    if s in after:
        raise ContractError("state %r lies on a cycle" % (s,))

    def name(x, bit):
        return "%s@%d" % (x, bit)

    names = {name(x, bit) for x in m.states for bit in (0, 1)}
    split_init = "split"
    while split_init in names:
        split_init += "'"
    states = [split_init]
    trans = {split_init: {"split": {name(s, 0): Fraction(1, 2),
                                    name(s, 1): Fraction(1, 2)}}}
    for bit in (0, 1):
        for x in m.states:
            states.append(name(x, bit))
            row = {}
            for a in m.actions(x):
                if x == s:
                    if bit == 0 and a != alpha:
                        continue
                    if bit == 1 and a == alpha:
                        continue
                row[a] = {name(t, bit): p for t, p in m.dist(x, a).items()}
            if row:
                trans[name(x, bit)] = row
    out = Mdp(states, split_init, trans, kind="mdp", allow_unreachable=True)
    return out, name(s, 0)


def _product(m, auto):
    start = (m.init, auto.step(auto.q0, m.init))
    order = []
    trans = {}
    seen = {start}
    queue = [start]
    while queue:
        ps = queue.pop(0)
        order.append(ps)
        s, q = ps
        row = {}
        for a in m.actions(s):
            dist = {}
            for t, p in m.dist(s, a).items():
                nxt = (t, auto.step(q, t))
                dist[nxt] = p
            row[a] = dist
            for nxt in dist:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        if row:
            trans[ps] = row
    names = {}
    used = set()
    for ps in order:
        base = "%s@%s" % ps
        while base in used:
            base += "'"
        names[ps] = base
        used.add(base)
    states = [names[ps] for ps in order]
    named_trans = {}
    for ps, row in trans.items():
        named_trans[names[ps]] = {
            a: {names[t]: p for t, p in dist.items()}
            for a, dist in row.items()}
    out = Mdp(states, names[start], named_trans, kind=m.kind)
    components = {names[ps]: ps for ps in order}
    fibers = {}
    for s in m.states:
        fibers[s] = [names[ps] for ps in order if ps[0] == s]
    smap = StateMap(fibers, components=components)
    return out, smap


def product_dra(m, dra):
    """Synchronous product with a Rabin automaton reading state names;
    returns the product, the lifted Rabin pairs, and the state map."""
    out, smap = _product(m, dra)
    pairs = []
    for l, k in dra.pairs:
        lifted_l = frozenset(x for x, (s, q) in smap.components.items()
                             if q in l)
        lifted_k = frozenset(x for x, (s, q) in smap.components.items()
                             if q in k)
        pairs.append((lifted_l, lifted_k))
    return out, pairs, smap


def product_dfa(m, dfa):
    """Synchronous product with a DFA; returns the product, the set of
    product states whose automaton component accepts, and the map."""
    out, smap = _product(m, dfa)
    accepting = frozenset(x for x, (s, q) in smap.components.items()
                          if q in dfa.accepting)
    return out, accepting, smap
