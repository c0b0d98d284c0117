# %% [markdown]
# # Cutting the cylinder at height Y
#
# The extension decays like exp(-sqrt(lambda_1) y), so the infinite cylinder
# can be truncated. truncation_report measures the tail beyond Y mode by mode.

# %%
import math

import numpy as np

from fracext import decay_integral, eigen_interval, fit_slope, make_frac_order, parse_spectral, truncation_report

order = make_frac_order(1.5)
f = parse_spectral("1:1, 3:0.5", eigen_interval())
Ys = np.array([1.0, 1.5, 2.0, 2.5, 3.0])
tails = []
for Y in Ys:
    rep = truncation_report(f, order, Y)
    tails.append(rep.tail_norm)
    print(f"Y={Y:3.1f}  tail {rep.tail_norm:.3e}  bound {rep.bound:.3e}")

# %% [markdown]
# The log of the tail is almost linear in Y with slope -sqrt(lambda_1) = -pi,
# twice as steep as the guaranteed rate sqrt(lambda_1)/2.

# %%
print("fitted slope", fit_slope(Ys, np.array(tails)), "vs", -math.pi)

# %% [markdown]
# For s = 3/2 the scaled tail integral has a closed form: I(a, inf)^2 = 2 e^{-2a}.

# %%
for a in (0.5, 1.0, 4.0):
    print(a, decay_integral(order, a), math.sqrt(2.0) * math.exp(-a))

# %% [markdown]
# The per-mode table is also available as CSV.

# %%
print(truncation_report(f, order, 1.0).to_csv())
