"""
Joining when the queue is visible
=================================

A customer who sees ``n`` people ahead is served only if ``n + 1``
services finish before the next catastrophe. This script prints the
expected net benefit for each queue length, the resulting equilibrium
threshold, and how the threshold moves as catastrophe compensation grows.
"""

from catqueue import EconParams, ModelParams, equilibrium_threshold, s_obs, sojourn_stats

params = ModelParams(lam=7.0, mu=4.0, xi=0.4, eta=2.0)
econ = EconParams(r_s=7.0, r_f=0.0, c=3.0)

# %%
# Per-position benefit. The sign change marks the threshold.
print(" n   P(served)   E[sojourn]   benefit")
for n in range(9):
    st = sojourn_stats(params, n)
    print(f"{n:2d}   {st.p_serve:9.6f}   {st.e_sojourn:10.6f}   {s_obs(params, econ, n):+8.4f}")
print("equilibrium threshold:", equilibrium_threshold(params, econ))

# %%
# Compensation makes long queues less risky. Once it covers the expected
# waiting cost until a catastrophe (c / xi), joining is always worthwhile.
for r_f in (0.0, 2.0, 4.0, 6.0, 7.0, 7.4, 7.5):
    print(f"r_f = {r_f:4.1f}  ->  n_e = {equilibrium_threshold(params, econ.replace(r_f=r_f))}")
