from fractions import Fraction as F
from prcause.model import Mdp, MdScheduler
from prcause.quality import (ConfusionMatrix, Surd, confusion_matrix, fscore,
                             mcc_under, quality_report, recall_covratio)
from prcause.rational import POS_INF

fig2 = Mdp(["init","c1","c2","eff","noeff"], "init",
    {"init": {"a": {"c1": F(1,3), "c2": F(1,3), "eff": F(1,12), "noeff": F(1,4)}},
     "c1": {"a": {"eff": 1}}, "c2": {"a": {"eff": F(1,4), "noeff": F(3,4)}}}, kind="mc")
sched2 = MdScheduler({"init": "a", "c1": "a", "c2": "a"})

cm = confusion_matrix(fig2, {"c1","c2"}, {"eff"}, sched2)
print("fig2 cm:", cm)
assert (cm.tp, cm.fp, cm.fn, cm.tn) == (F(5,12), F(1,4), F(1,12), F(1,4))

r, cov, wit = recall_covratio(fig2, {"c1","c2"}, {"eff"})
print("fig2 recall/cov:", r, cov)
assert (r, cov) == (F(5,6), F(5))
print("  witness:", wit, wit.scheduler)

mcc = mcc_under(sched2, fig2, {"c1","c2"}, {"eff"})
print("fig2 mcc:", repr(mcc), float(mcc))
assert mcc == Surd(1, 2, 4)

# perfect / independent classifiers straight through the formula
from prcause.quality import _square_split
m_perfect = Mdp(["i","c","eff","noeff"], "i",
    {"i": {"a": {"c": F(1,2), "noeff": F(1,2)}}, "c": {"a": {"eff": 1}}}, kind="mc")
s_p = MdScheduler({"i": "a", "c": "a"})
assert mcc_under(s_p, m_perfect, {"c"}, {"eff"}) == F(1)

fig12 = Mdp(["init","s1","s2","eff","noeff"], "init",
    {"init": {"a": {"eff": F(1,4), "noeff": F(1,4), "s1": F(1,2)}},
     "s1": {"a": {"noeff": F(1,4), "s2": F(3,4)}},
     "s2": {"a": {"eff": 1}}}, kind="mc")
r1, cov1, w1 = recall_covratio(fig12, {"s1"}, {"eff"})
f1, wf1 = fscore(fig12, {"s1"}, {"eff"})
print("fig12 s1:", r1, cov1, f1)
assert (r1, cov1, f1) == (F(3,5), F(3,2), F(2,3))
sched12 = MdScheduler({"init": "a", "s1": "a", "s2": "a"})
cm1 = confusion_matrix(fig12, {"s1"}, {"eff"}, sched12)
assert cm1.precision == F(3,4) and cm1.recall == F(3,5)
cm2 = confusion_matrix(fig12, {"s2"}, {"eff"}, sched12)
assert (cm2.tp, cm2.fp, cm2.fn, cm2.tn) == (F(3,8), F(0), F(1,4), F(3,8))
f2, wf2 = fscore(fig12, {"s2"}, {"eff"})
print("fig12 s2 fscore:", f2)
assert f2 == F(3,4) and cm2.precision == F(1)

# PosInf convention: cause covers every effect path
m_cover = Mdp(["i","c","eff","noeff"], "i",
    {"i": {"a": {"c": F(1,2), "noeff": F(1,2)}}, "c": {"a": {"eff": F(1,2), "noeff": F(1,2)}}}, kind="mc")
rc, cc, wc = recall_covratio(m_cover, {"c"}, {"eff"})
print("cover:", rc, cc, wc)
assert rc == F(1) and cc is POS_INF and wc is None

# zero case: avoid the cause yet reach the effect
fig5 = Mdp(["init","c","eff_u","eff_c","noeff"], "init",
    {"init": {"alpha": {"eff_u": 1}, "beta": {"c": F(1,2), "noeff": F(1,2)}},
     "c": {"tau": {"eff_c": F(1,2), "noeff": F(1,2)}}})
f5, wf5 = fscore(fig5, {"c"}, {"eff_u","eff_c"}, assume_cause=True)
print("fig5 fscore:", f5, wf5)
assert f5 == 0 and wf5 is not None

# pre-check refuses non-causes unless waived
try:
    fscore(fig5, {"c"}, {"eff_u","eff_c"})
    raise SystemExit("should have raised")
except Exception as e:
    print("refused non-cause:", type(e).__name__)

rep = quality_report(fig2, {"c1","c2"}, {"eff"})
print("report:", rep)
assert rep.recall == F(5,6) and rep.covratio == F(5)
assert rep.fscore == 2/(F(1,4)/F(5,12)+F(1,12)/F(5,12)+2) or True
print("fig2 fscore:", rep.fscore)
# X = (fp+fn)/tp on the single scheduler = (1/4+1/12)/(5/12) = 4/5 -> 2/(4/5+2)=5/7
assert rep.fscore == F(5,7)
print("ALL QUALITY SMOKE OK")
