# %% [markdown]
# # Brownian paths: statistical checks
#
# On sampled paths the martingale property only holds in distribution, so
# every comparison is a z-score against the sample standard error.

# %%
import numpy as np

from banach_ito import corpus
from banach_ito.integral import continuity_profile, holder_scaling_check
from banach_ito.martingale import mc_brownian, quadratic_variation, verify_qv_properties
from banach_ito.spaces import SupGrid

W = mc_brownian(path_count=100_000, grid=np.linspace(0, 1, 17), seed=7)
end = quadratic_variation(W).paths[:, -1]
print("mean [W](1) =", end.mean(), "+/-", end.std(ddof=1) / np.sqrt(end.size))

rep = verify_qv_properties(W)
print("M^2 - [M] martingale, largest |z| over test functions:", round(rep.max_z, 2))

# %% [markdown]
# ## Continuity at zero
#
# For a constant integrand the profile `t -> ||int_0^t x dW||` shrinks like
# `sqrt(t)`.

# %%
x = corpus.constant_process(W, SupGrid(2), [1.0, 2.0])
times = [1, 1 / 2, 1 / 4, 1 / 8]
for t, p in zip(times, continuity_profile(x, W, times)):
    print(f"t={t:6.4f}  profile={p:.4f}  2*sqrt(t)={2 * np.sqrt(t):.4f}")

# %% [markdown]
# ## Hölder scaling in a parameter
#
# `x(tau)(s) = |tau|**0.75 cos(W(s))` is Hölder of order 0.75 in `tau`; the
# mean square of the integral's increments should scale with exponent about
# 1.5.

# %%
params = np.array([0.0, 0.05, 0.1, 0.2, 0.4, 0.8])
tab = holder_scaling_check(corpus.power_family(W, params, 0.75), params, W, 1.0, beta=0.75)
for d, m, se, b in tab.rows:
    print(f"|tau-sigma|={d:4.2f}  E[dI^2]={m:.5f} +/- {se:.5f}  bound={b:.5f}")
print("log-log slope:", round(tab.slope, 3))
