"""Smoke test for omega.py against hand-computed values."""

from fractions import Fraction as F

from prcause.automata import Dfa, Dra
from prcause.errors import ContractError
from prcause.model import Mdp
from prcause.omega import (canonical_reachability_cause, check_cosafety_gpr,
                           check_cosafety_spr_necessary,
                           check_reachability_gpr, check_reachability_spr,
                           cosafety_quality, cosafety_transform,
                           reachability_optimal, reachability_quality,
                           regular_effect_transform, temp_prio2_check,
                           temp_prio_check)
from prcause.reach import min_reach_prob

H = F(1, 2)
ONE = F(1)


def eventually_dra(alphabet, eff_states):
    """Two-state DRA accepting runs that ever visit eff_states."""
    delta = {}
    for sym in alphabet:
        delta[("qe0", sym)] = "qe1" if sym in eff_states else "qe0"
        delta[("qe1", sym)] = "qe1"
    return Dra(["qe0", "qe1"], "qe0", delta, [((), ("qe1",))])


def word_dfa(words, alphabet):
    """DFA accepting exactly the given finite words (tuples of symbols)."""
    prefixes = {()}
    for w in words:
        for i in range(len(w) + 1):
            prefixes.add(tuple(w[:i]))
    names = {p: "q_" + "_".join(p) if p else "q0" for p in prefixes}
    delta = {}
    for p in prefixes:
        for sym in alphabet:
            nxt = p + (sym,)
            delta[(names[p], sym)] = names.get(nxt, "dead")
    for sym in alphabet:
        delta[("dead", sym)] = "dead"
    states = sorted(set(names.values())) + ["dead"]
    accepting = frozenset(names[tuple(w)] for w in words)
    return Dfa(states, names[()], delta, accepting)


def check(label, got, want):
    ok = got == want
    print("%-58s %s" % (label,
                        "ok" if ok else "FAIL: got %r want %r" % (got, want)))
    if not ok:
        raise SystemExit(1)


# -- Fig 12 style chain: canonical cause under a reachability DRA ----------

fig12 = Mdp(
    ["init", "s1", "s2", "eff", "noeff"],
    "init",
    {
        "init": {"a": {"eff": F(1, 4), "noeff": F(1, 4), "s1": H}},
        "s1": {"a": {"noeff": F(1, 4), "s2": F(3, 4)}},
        "s2": {"a": {"eff": ONE}},
    },
    kind="mc",
)

a12 = eventually_dra(fig12.states, {"eff"})

res = canonical_reachability_cause(fig12, a12)
check("fig12 canonical cause front", res[0], frozenset(["s1"]))
check("fig12 canonical recall", res[1], F(3, 5))
check("fig12 canonical covratio", res[2], F(3, 2))

v = check_reachability_spr(fig12, a12, {"s1"})
check("fig12 spr {s1}", bool(v), True)
v = check_reachability_gpr(fig12, a12, {"s1"})
check("fig12 gpr {s1}", bool(v), True)

tp = temp_prio_check(fig12, a12, {"s2", "s1"})
check("fig12 tempprio s1", tp["s1"], True)
check("fig12 tempprio s2", tp["s2"], False)

try:
    reachability_quality(fig12, a12, {"s2"}, "recall")
    raise SystemExit("expected ContractError for s2 tempprio")
except ContractError as e:
    print("fig12 quality tempprio gate raises: ok (%s)" % e)

val, wit = reachability_quality(fig12, a12, {"s2"}, "recall",
                                assume_cause=True, tempprio=False)
print("fig12 recall for {s2} with gates waived:", val)

val, wit = reachability_quality(fig12, a12, {"s1"}, "recall")
check("fig12 quality recall {s1}", val, F(3, 5))
val, wit = reachability_quality(fig12, a12, {"s1"}, "covratio")
check("fig12 quality covratio {s1}", val, F(3, 2))

# -- Fig 15 chain: regular cause family over a reachability effect ---------

fig15 = Mdp(
    ["init", "a", "b", "c", "e", "f1", "f2"],
    "init",
    {
        "init": {"u": {"a": F(1, 3), "b": F(1, 3), "e": F(1, 3)}},
        "a": {"u": {"a": H, "c": H}},
        "b": {"u": {"e": F(3, 4), "f2": F(1, 4)}},
        "c": {"u": {"e": F(1, 4), "f1": F(3, 4)}},
    },
    kind="mc",
)

a15 = eventually_dra(fig15.states, {"e"})
SIGMA15 = tuple(fig15.states)

# rCause_p: init b plus a regular bundle of paths init a^k c of mass p/3
cause_0 = word_dfa([("init", "b")], SIGMA15)
cause_e = word_dfa([("init", "b"), ("init", "a", "a", "a", "c")], SIGMA15)
cause_q = word_dfa([("init", "b"), ("init", "a", "a", "c")], SIGMA15)
cause_34 = word_dfa([("init", "b"), ("init", "a", "a", "a", "c"),
                     ("init", "a", "a", "a", "a", "c")], SIGMA15)

v = check_cosafety_gpr(fig15, a15, cause_0)
check("fig15 gpr p=0", bool(v), True)
v = check_cosafety_gpr(fig15, a15, cause_e)
check("fig15 gpr p=1/8", bool(v), True)
v = check_cosafety_gpr(fig15, a15, cause_q)
check("fig15 gpr p=1/4", bool(v), False)

check("fig15 recall p=0", cosafety_quality(fig15, a15, cause_0, "recall"),
      F(3, 8))
check("fig15 recall p=1/8", cosafety_quality(fig15, a15, cause_e, "recall"),
      F(25, 64))
check("fig15 recall p=3/16",
      cosafety_quality(fig15, a15, cause_34, "recall"), F(51, 128))

# p = 1/6: odd k >= 3, realized with a parity loop
delta = {}
for sym in SIGMA15:
    for q in ("p0", "p1", "c1", "c2", "c3", "c4", "acc", "dead"):
        delta[(q, sym)] = "dead"
delta[("p0", "init")] = "p1"
delta[("p1", "b")] = "acc"
delta[("p1", "a")] = "c1"
delta[("c1", "a")] = "c2"
delta[("c2", "a")] = "c3"
delta[("c3", "c")] = "acc"
delta[("c3", "a")] = "c4"
delta[("c4", "a")] = "c3"
cause_6 = Dfa(["p0", "p1", "c1", "c2", "c3", "c4", "acc", "dead"],
              "p0", delta, frozenset(["acc"]))
check("fig15 dfa p=1/6 prefix-free", cause_6.is_prefix_free(), True)
v = check_cosafety_gpr(fig15, a15, cause_6)
check("fig15 gpr p=1/6", bool(v), True)
check("fig15 recall p=1/6", cosafety_quality(fig15, a15, cause_6, "recall"),
      F(19, 48))

res = canonical_reachability_cause(fig15, a15)
check("fig15 canonical front", res[0], frozenset(["b"]))
check("fig15 canonical recall", res[1], F(3, 8))
check("fig15 canonical covratio", res[2], F(3, 5))

opt = reachability_optimal(fig15, a15, "recall", kind="gpr")
check("fig15 optimal cause", opt.cause, frozenset(["b"]))
check("fig15 optimal value", opt.value, F(3, 8))

check("fig15 tempprio2 p=0", temp_prio2_check(fig15, a15, cause_0), True)

tr = regular_effect_transform(fig15, a15, {"b"})
vals, _ = min_reach_prob(tr.mdp, tr.eff)
check("fig15 Pr(eff) via transform", vals[tr.mdp.init], F(2, 3))

# -- Fig 16: the co-safety strict check -------------------------------------

fig16 = Mdp(
    ["init", "b", "d", "c", "t", "noeff", "eff"],
    "init",
    {
        "init": {"u": {"t": H, "b": F(1, 4), "d": F(1, 4)}},
        "b": {"u": {"c": ONE}},
        "d": {"u": {"c": ONE}},
        "t": {"u": {"noeff": F(3, 4), "eff": F(1, 4)}},
        "c": {"beta": {"eff": ONE},
              "alpha": {"eff": H, "noeff": H}},
    },
)

a16 = eventually_dra(fig16.states, {"eff"})
SIGMA16 = tuple(fig16.states)

v = check_reachability_spr(fig16, a16, {"c"})
check("fig16 state spr {c}", bool(v), True)

# merged accepting state: one good-prefix class
deltam = {}
for sym in SIGMA16:
    for q in ("m0", "m1", "m2", "macc", "dead"):
        deltam[(q, sym)] = "dead"
deltam[("m0", "init")] = "m1"
deltam[("m1", "b")] = "m2"
deltam[("m1", "d")] = "m2"
deltam[("m2", "c")] = "macc"
cause_merged = Dfa(["m0", "m1", "m2", "macc", "dead"], "m0", deltam,
                   frozenset(["macc"]))

v = check_cosafety_spr_necessary(fig16, a16, cause_merged)
check("fig16 merged dfa verdict", v.status, "unknown")

# split accepting states: two cause states with distinct dfa components
cause_split16 = word_dfa([("init", "b", "c"), ("init", "d", "c")], SIGMA16)
v2 = check_cosafety_spr_necessary(fig16, a16, cause_split16)
tr2 = v2.transform
check("fig16 split dfa cause count", len(tr2.cause), 2)
check("fig16 split dfa component count",
      len(set(tr2.dfa_components.values())), 2)
check("fig16 split dfa verdict", v2.status, "no")

# MC refinement: alpha after init b cb, beta after init d cd
fig16mc = Mdp(
    ["init", "b", "d", "cb", "cd", "t", "noeff", "eff"],
    "init",
    {
        "init": {"u": {"t": H, "b": F(1, 4), "d": F(1, 4)}},
        "b": {"u": {"cb": ONE}},
        "d": {"u": {"cd": ONE}},
        "t": {"u": {"noeff": F(3, 4), "eff": F(1, 4)}},
        "cb": {"alpha": {"eff": H, "noeff": H}},
        "cd": {"beta": {"eff": ONE}},
    },
    kind="mc",
)
a16mc = eventually_dra(fig16mc.states, {"eff"})
cause_mc = word_dfa([("init", "b", "cb"), ("init", "d", "cd")],
                    tuple(fig16mc.states))
v3 = check_cosafety_spr_necessary(fig16mc, a16mc, cause_mc)
check("fig16 mc verdict", v3.status, "no")
check("fig16 mc p_eff", v3.p_eff, H)
check("fig16 mc conditionals", sorted(v3.conditionals.values()), [H, ONE])
check("fig16 mc violations", len(v3.violations), 1)

v4 = check_cosafety_spr_necessary(fig16mc, a16mc, cause_mc, strict=False)
check("fig16 mc non-strict verdict", v4.status, "yes")

# -- guards -----------------------------------------------------------------

# cause covering every run: DFA accepting just "init" -> equality, no raise
cause_all = word_dfa([("init",)], SIGMA15)
v = check_cosafety_gpr(fig15, a15, cause_all)
check("fig15 whole-run cause gpr", bool(v), False)

bad = word_dfa([("init",), ("init", "b")], SIGMA15)
check("bad dfa not prefix-free", bad.is_prefix_free(), False)
try:
    cosafety_transform(fig15, a15, bad)
    raise SystemExit("expected prefix-freeness rejection")
except ContractError as e:
    print("prefix-freeness gate raises: ok (%s)" % e)

print("all omega smoke checks passed")
