"""
Compensation sweeps
===================

For each compensation level the four welfare numbers are compared:
mixed equilibrium, mixed optimum, threshold equilibrium, threshold optimum.
Visible queues usually help, but in some parameter ranges the best blind
policy beats the visible-queue equilibrium.
"""

import numpy as np

from catqueue import EconParams, ModelParams, analyze

for label, params, r_s in [
    ("usual ordering", ModelParams(7.0, 2.0, 0.7, 1.0), 7.0),
    ("crossing", ModelParams(7.0, 4.0, 0.3, 2.0), 4.0),
]:
    print(f"\n{label}: {params}")
    print(" r_f    n_e   n_soc   un(q_e)  un(q_soc)  obs(n_e)  obs(n_soc)")
    for r_f in np.arange(0.0, 10.01, 1.0):
        a = analyze(params, EconParams(r_s, float(r_f), 3.0))
        print(f"{r_f:4.1f}  {str(a.n_e):>6}  {str(a.n_soc):>5}  {a.s_un_soc_at_qe:8.4f}  "
              f"{a.s_un_soc_at_qsoc:8.4f}  {a.s_obs_soc_at_ne:8.4f}  {a.s_obs_soc_at_nsoc:8.4f}")
