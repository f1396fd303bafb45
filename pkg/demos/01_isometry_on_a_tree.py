# %% [markdown]
# # The isometry on a binary tree
#
# A symmetric random walk on `2**steps` equally likely leaves is a martingale
# whose conditional expectations can be computed exactly, by block averages.
# We integrate a random elementary process with values in `C(K)` (a sup-norm
# grid) and compare both sides of the isometry, coordinate by coordinate, in
# the multiplication target.

# %%
import numpy as np

from banach_ito import corpus
from banach_ito.integral import integrate_elementary, ito_isometry_residual, l2m_norm, m_norm_process
from banach_ito.martingale import quadratic_variation, random_walk_martingale
from banach_ito.spaces import SupGrid

omega, F, M = random_walk_martingale(steps=6, scale=0.5)
print(M)
print("grid:", M.grid)

# %% [markdown]
# Realized quadratic variation of the walk is deterministic: every squared
# increment equals `scale**2`.

# %%
qv = quadratic_variation(M)
print(qv.paths[0])

# %%
rng = np.random.default_rng(1)
X = SupGrid(4)
x = corpus.random_elementary(rng, F, X)
print("breakpoints:", x.breakpoints)

for t in M.grid[1::2]:
    r = ito_isometry_residual(x, M, t)
    print(f"t={t:5.2f}  E[z^2]={np.round(r.lhs.coords, 4)}  E[int x^2 d[M]]={np.round(r.rhs.coords, 4)}"
          f"  residual={r.residual:.1e}")

# %% [markdown]
# The M-norm takes the sup of the coordinates *after* integrating, the
# `L^2_M` norm takes it *before*; the former is never larger.

# %%
print("M-norm  :", m_norm_process(x, M))
print("L2_M    :", l2m_norm(x, M))

# %% [markdown]
# Leaf by leaf, the integral is a plain finite sum.

# %%
z = integrate_elementary(x, M)
print(z.values[:4])
