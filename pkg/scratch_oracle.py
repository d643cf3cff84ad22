from fractions import Fraction as F
from prcause.model import Mdp
from prcause.transforms import canonical_form, wmin_cause
from prcause.graph import mec_decompose
from prcause.oracle import (SchedulerGrid, evaluate_scheduler,
                            generate_random_mdp, quality_envelope,
                            refute_pr_oracle)

fig2 = Mdp(["init","c1","c2","eff","noeff"], "init",
    {"init": {"a": {"c1": F(1,3), "c2": F(1,3), "eff": F(1,12), "noeff": F(1,4)}},
     "c1": {"a": {"eff": 1}}, "c2": {"a": {"eff": F(1,4), "noeff": F(3,4)}}}, kind="mc")
fig4 = Mdp(["init","s","c","eff","noeff"], "init",
    {"init": {"a": {"s": F(1,2), "noeff": F(1,2)}},
     "s": {"alpha": {"noeff": F(3,4), "eff": F(1,4)}, "beta": {"eff": F(1,2), "c": F(1,2)}},
     "c": {"a": {"s": 1}}})
fig5 = Mdp(["init","c","eff_u","eff_c","noeff"], "init",
    {"init": {"alpha": {"eff_u": 1}, "beta": {"c": F(1,2), "noeff": F(1,2)}},
     "c": {"tau": {"eff_c": F(1,2), "noeff": F(1,2)}}})

canon5, smap5 = canonical_form(fig5, {"c"}, {"eff_u", "eff_c"})
m5 = canon5.mdp
eff5 = {canon5.eff_cov, canon5.eff_unc}
print("canon5 states:", m5.states)
r = refute_pr_oracle(m5, set(canon5.cause), eff5, "gpr", SchedulerGrid(2))
print("fig5 refuter:", r)
assert r is not None
ev = evaluate_scheduler(m5, r, set(canon5.cause), eff5)
print("  p_eff", ev["p_eff"], "cond", ev["tp"]/ev["p_cause"])
assert r.dist("init") == {"alpha": F(1,2), "beta": F(1,2)}

r2 = refute_pr_oracle(fig2, {"c1"}, {"eff"}, "gpr", SchedulerGrid(3))
r2s = refute_pr_oracle(fig2, {"c1"}, {"eff"}, "spr", SchedulerGrid(3))
print("fig2 c1 refuter:", r2, r2s)
assert r2 is None and r2s is None
r2b = refute_pr_oracle(fig2, {"c2"}, {"eff"}, "gpr", SchedulerGrid(0))
print("fig2 c2 refuter:", r2b)
assert r2b is not None

n4, maps4 = wmin_cause(fig4, {"c"}, {"eff"})
print("wmin4 states:", n4.states, "designated:", maps4.designated)
r4 = refute_pr_oracle(n4, {"c"}, {"eff"}, "gpr", SchedulerGrid(1))
print("fig4 refuter:", r4)
assert r4 is not None and r4.dist("s") == {"beta": F(1)}
ev4 = evaluate_scheduler(n4, r4, {"c"}, {"eff"})
assert ev4["p_eff"] == F(5,16) and ev4["tp"]/ev4["p_cause"] == F(1,4)

env = quality_envelope(fig2, {"c1"}, {"eff"}, SchedulerGrid(4))
print("fig2 envelope:", {k: v[0] for k, v in env.items()})
assert env["recall"][0] == F(2,3) and env["covratio"][0] == F(2) and env["fscore"][0] == F(4,5)

for seed in range(30):
    a = generate_random_mdp(seed, 6, 3, True)
    b = generate_random_mdp(seed, 6, 3, True)
    assert a.states == b.states and a.init == b.init
    for s in a.states:
        assert list(a.actions(s)) == list(b.actions(s))
        for act in a.actions(s):
            assert a.dist(s, act) == b.dist(s, act)
    assert mec_decompose(a) == []
    assert any(a.is_terminal(s) for s in a.states)
cyc = [generate_random_mdp(s, 6, 3, False) for s in range(30)]
print("random ok; non-dag models with MECs:", sum(1 for m in cyc if mec_decompose(m)))
print("ALL ORACLE SMOKE OK")
