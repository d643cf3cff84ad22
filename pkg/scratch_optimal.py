from fractions import Fraction as F

from prcause.errors import UndecidedError
from prcause.model import Mdp
from prcause.optimal import (canonical_cause, fscore_optimal_mc, gpr_optimal,
                             gpr_threshold, spr_fscore_threshold)

fig2 = Mdp(["init", "c1", "c2", "eff", "noeff"], "init",
    {"init": {"a": {"c1": F(1, 3), "c2": F(1, 3), "eff": F(1, 12), "noeff": F(1, 4)}},
     "c1": {"a": {"eff": 1}},
     "c2": {"a": {"eff": F(1, 4), "noeff": F(3, 4)}}}, kind="mc")

fig3 = Mdp(["init", "eff"], "init",
    {"init": {"a": {"eff": 1}}}, kind="mc")

fig12 = Mdp(["init", "s1", "s2", "eff", "noeff"], "init",
    {"init": {"a": {"eff": F(1, 4), "noeff": F(1, 4), "s1": F(1, 2)}},
     "s1": {"a": {"noeff": F(1, 4), "s2": F(3, 4)}},
     "s2": {"a": {"eff": 1}}}, kind="mc")

# canonical causes
cc = canonical_cause(fig2, {"eff"})
print("fig2 canonical:", cc)
assert cc == (frozenset({"c1"}), F(2, 3), F(2)), cc

cc12 = canonical_cause(fig12, {"eff"})
print("fig12 canonical:", cc12)
assert cc12 == (frozenset({"s1"}), F(3, 5), F(3, 2)), cc12

assert canonical_cause(fig3, {"eff"}) is None

# f-score optimal causes of chains
r12 = fscore_optimal_mc(fig12, {"eff"})
print("fig12 fscore-opt:", r12)
assert r12 == (frozenset({"s2"}), F(3, 4)), r12

r2 = fscore_optimal_mc(fig2, {"eff"})
print("fig2 fscore-opt:", r2)
assert r2 == (frozenset({"c1"}), F(4, 5)), r2

# threshold queries
assert spr_fscore_threshold(fig12, {"eff"}, F(7, 10)) is True
assert spr_fscore_threshold(fig12, {"eff"}, F(4, 5)) is False
assert spr_fscore_threshold(fig12, {"eff"}, F(3, 4)) is False
assert spr_fscore_threshold(fig12, {"eff"}, F(3, 4), strict=False) is True
assert spr_fscore_threshold(fig12, {"eff"}, 0) is True
assert spr_fscore_threshold(fig12, {"eff"}, 1) is False
assert spr_fscore_threshold(fig12, {"eff"}, 1, strict=False) is False
assert spr_fscore_threshold(fig3, {"eff"}, 0) is False
assert spr_fscore_threshold(fig2, {"eff"}, F(1, 2)) is True
assert spr_fscore_threshold(fig2, {"eff"}, F(4, 5)) is False
assert spr_fscore_threshold(fig2, {"eff"}, F(4, 5), strict=False) is True
print("thresholds ok")

# a model where some scheduler avoids the effect entirely: those
# schedulers must not drag the worst-case f-score to zero
dodge = Mdp(["init", "s", "eff", "noeff"], "init",
    {"init": {"go": {"s": F(1, 2), "noeff": F(1, 2)},
              "bail": {"noeff": 1}},
     "s": {"a": {"eff": F(2, 3), "noeff": F(1, 3)}}})
assert spr_fscore_threshold(dodge, {"eff"}, F(7, 10)) is True
assert spr_fscore_threshold(dodge, {"eff"}, F(4, 5)) is False
assert spr_fscore_threshold(dodge, {"eff"}, F(4, 5), strict=False) is True
print("dodge thresholds ok")

# globally optimal causes
g = gpr_optimal(fig2, {"eff"}, "recall")
print("fig2 gpr recall:", g)
assert g.cause == frozenset({"c1", "c2"}) and g.value == F(5, 6), g
assert g.method == "enumeration"

gc = gpr_optimal(fig2, {"eff"}, "covratio")
print("fig2 gpr covratio:", gc)
assert gc.cause == frozenset({"c1", "c2"}) and gc.value == F(5), gc

gf = gpr_optimal(fig2, {"eff"}, "fscore")
print("fig2 gpr fscore:", gf)
assert gf.cause == frozenset({"c1"}) and gf.value == F(4, 5), gf

assert gpr_optimal(fig3, {"eff"}, "recall") is None

g12 = gpr_optimal(fig12, {"eff"}, "fscore")
print("fig12 gpr fscore:", g12)
assert g12.cause == frozenset({"s2"}) and g12.value == F(3, 4), g12

g12c = gpr_optimal(fig12, {"eff"}, "covratio")
print("fig12 gpr covratio:", g12c)
assert g12c.cause == frozenset({"s1"}) and g12c.value == F(3, 2), g12c

assert gpr_threshold(fig2, {"eff"}, "recall", F(4, 5)) is True
assert gpr_threshold(fig2, {"eff"}, "recall", F(9, 10)) is False
assert gpr_threshold(fig2, {"eff"}, "recall", F(5, 6)) is True
assert gpr_threshold(fig2, {"eff"}, "recall", F(5, 6), strict=True) is False
assert gpr_threshold(fig3, {"eff"}, "recall", 0) is False
print("gpr thresholds ok")

# budget exhaustion surfaces as undecided
try:
    gpr_optimal(fig2, {"eff"}, "recall", budget=2)
    raise SystemExit("expected UndecidedError")
except UndecidedError as e:
    print("budget:", e)

# an early hit inside the budget still answers
assert spr_fscore_threshold(fig12, {"eff"}, F(1, 2), budget=1) is True
try:
    spr_fscore_threshold(fig12, {"eff"}, F(4, 5), budget=1)
    raise SystemExit("expected UndecidedError")
except UndecidedError as e:
    print("budget:", e)

print("all optimal smoke checks passed")
