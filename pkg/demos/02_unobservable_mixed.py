"""
Joining blind
=============

Without queue information customers join an operative server with some
probability ``q``. The queue length is then geometric with ratio ``x2``,
the small root of a quadratic. The equilibrium ``q_e`` makes a joiner
indifferent; the welfare-maximising ``q_soc`` is smaller because each
joiner slows everyone behind them.
"""

import numpy as np

from catqueue import EconParams, ModelParams, char_roots, equilibrium_mixed, optimal_mixed_social, s_un
from catqueue import social_benefit_unobservable

params = ModelParams(lam=7.0, mu=2.0, xi=0.7, eta=1.0)
econ = EconParams(r_s=7.0, r_f=0.0, c=3.0)

q_e = equilibrium_mixed(params, econ).q
opt = optimal_mixed_social(params, econ)
print(f"q_e   = {q_e:.9f}   (benefit of joining there: {s_un(params, econ, 1.0, q_e):+.1e})")
print(f"q_soc = {opt.strategy.q:.9f}   welfare {opt.value:.6f}")

# %%
# Welfare along q: rises, peaks at q_soc, and falls to zero at q_e.
for q in np.linspace(0.0, 1.0, 11):
    x2 = char_roots(params, q).x2
    print(f"q = {q:.1f}  x2 = {x2:.4f}  welfare = {social_benefit_unobservable(params, econ, q):+.4f}")
