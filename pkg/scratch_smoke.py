from fractions import Fraction as F

from prcause.model import Mdp
from prcause.checking import (CauseQuery, check_spr, check_gpr, check_gpr_mc,
                              spr_singleton_check, exists_cause, replay_pr,
                              check_minimality)

fig2 = Mdp(
    ["init", "c1", "c2", "eff", "noeff"], "init",
    {"init": {"a": {"c1": F(1, 3), "c2": F(1, 3),
                    "eff": F(1, 12), "noeff": F(1, 4)}},
     "c1": {"a": {"eff": 1}},
     "c2": {"a": {"eff": F(1, 4), "noeff": F(3, 4)}}},
    kind="mc")

fig4 = Mdp(
    ["init", "s", "c", "eff", "noeff"], "init",
    {"init": {"a": {"s": F(1, 2), "noeff": F(1, 2)}},
     "s": {"alpha": {"noeff": F(3, 4), "eff": F(1, 4)},
           "beta": {"eff": F(1, 2), "c": F(1, 2)}},
     "c": {"a": {"s": 1}}})

fig5 = Mdp(
    ["init", "c", "eff_u", "eff_c", "noeff"], "init",
    {"init": {"alpha": {"eff_u": 1},
              "beta": {"c": F(1, 2), "noeff": F(1, 2)}},
     "c": {"tau": {"eff_c": F(1, 2), "noeff": F(1, 2)}}})

print("== fig2 ==")
print("spr {c1}:", check_spr(CauseQuery(fig2, {"c1"}, {"eff"}, "spr")).is_cause)
print("gpr {c1}:", check_gpr(CauseQuery(fig2, {"c1"}, {"eff"}, "gpr")).is_cause)
print("gpr_mc {c1}:", check_gpr_mc(CauseQuery(fig2, {"c1"}, {"eff"}, "gpr")).is_cause)
print("spr {c2}:", check_spr(CauseQuery(fig2, {"c2"}, {"eff"}, "spr")).is_cause)
print("gpr {c2}:", check_gpr(CauseQuery(fig2, {"c2"}, {"eff"}, "gpr")).is_cause)
v = check_spr(CauseQuery(fig2, {"c1", "c2"}, {"eff"}, "spr"))
print("spr {c1,c2}:", v.is_cause, v.violated_condition)
print("gpr {c1,c2}:", check_gpr(CauseQuery(fig2, {"c1", "c2"}, {"eff"}, "gpr")).is_cause)
print("gpr_mc {c1,c2}:", check_gpr_mc(CauseQuery(fig2, {"c1", "c2"}, {"eff"}, "gpr")).is_cause)
print("exists:", exists_cause(fig2, {"eff"}))

print("== fig4 ==")
v = check_gpr(CauseQuery(fig4, {"c"}, {"eff"}, "gpr"))
print("gpr {c}:", v.is_cause)
if not v.is_cause:
    print("  replay:", {k: str(x) for k, x in v.refuting_witness.replay.items()})
v = check_spr(CauseQuery(fig4, {"c"}, {"eff"}, "spr"))
print("spr {c}:", v.is_cause, v.violated_condition)
if not v.is_cause:
    print("  replay:", {k: str(x) for k, x in v.refuting_witness.replay.items()})

print("== fig5 ==")
v = check_gpr(CauseQuery(fig5, {"c"}, {"eff_u", "eff_c"}, "gpr"))
print("gpr {c}:", v.is_cause)
if not v.is_cause:
    print("  replay:", {k: str(x) for k, x in v.refuting_witness.replay.items()})
    print("  canonical MR:", {s: {a: str(p) for a, p in d.items()}
                              for s, d in v.refuting_witness.canonical.choice.items()})
v = check_spr(CauseQuery(fig5, {"c"}, {"eff_u", "eff_c"}, "spr"))
print("spr {c}:", v.is_cause)

print("== non-strict ==")
print("fig5 gpr non-strict:",
      check_gpr(CauseQuery(fig5, {"c"}, {"eff_u", "eff_c"}, "gpr", "non-strict")).is_cause)
print("fig2 gpr_mc {c2} non-strict:",
      check_gpr_mc(CauseQuery(fig2, {"c2"}, {"eff"}, "gpr", "non-strict")).is_cause)
