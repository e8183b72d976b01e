"""Two-summands solitons on the quaternionic families (Examples 2 and 3).

Each run starts at t0 = 0.01 with g_2(0) = 6 and stops at t = 200.  The
table lists the slope of u, the ratio of the two normalised shape
coefficients and whether each stays below its normalised inverse radius.
"""
from solitonflow import asymptotic_report
from solitonflow.checks import TWO_SUMMANDS_CASES, two_summands_run

print(f"{'case':<14}{'udot':>10}{'X1/X2':>10}{'Y1/Y2':>10}  X<Y")
for kind, m in TWO_SUMMANDS_CASES:
    tr = two_summands_run(kind, m)
    rep = asymptotic_report(tr)
    lim = rep.xy_limits
    below = all(lim[f"Xtilde_{i}"] < lim[f"Ytilde_{i}"] for i in (1, 2))
    print(f"{kind + ' m=' + str(m):<14}{rep.udot_limit:>10.4f}"
          f"{lim['Xtilde_1/Xtilde_2']:>10.4f}{lim['Ytilde_1/Ytilde_2']:>10.4f}  {below}")
