# %% [markdown]
# # Solving (-Delta)^s u = f on (0, 1)
#
# The discrete extension is solved on the truncated cylinder and its trace at
# y = 0 approximates u. The spectral oracle gives the exact answer.

# %%
import math

import numpy as np

from fracext import eigen_interval, make_frac_order, oracle_solve, parse_spectral, solve_problem

s = 1.5
f = parse_spectral("1:1", eigen_interval())
u = oracle_solve(f, make_frac_order(s))
print("exact coefficient U_1 =", u.coeffs[1], "= pi^-3 =", math.pi**-3)

# %%
sol, rec = solve_problem(f, s, Y=3.0, gamma=2.0, Nx=32, M=32)
print(f"H^s error {rec.err_hs:.3e}  L2 error {rec.err_l2:.3e}  solver residual {rec.residual:.1e}")

# %% [markdown]
# The trace against the exact solution at a few points.

# %%
tr = sol.trace()
x = np.linspace(0.0, 1.0, 6)
for xi, a, b in zip(x, tr(x), u(x)):
    print(f"x={xi:.1f}  discrete {a: .10f}  exact {b: .10f}")

# %% [markdown]
# Galerkin energy identity: u^T A u equals load^T u.

# %%
print(sol.energy(), sol.load_energy())
