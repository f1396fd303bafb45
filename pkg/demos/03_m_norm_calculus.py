# %% [markdown]
# # Calculus of the M-norm
#
# On a finite measure space, `||x||_M = ||sum_s mu_s x(s)^2||_Y ** 0.5`.
# Below: Cauchy-Schwarz, a dominating operator for a linear map, the product
# space constants, and the reassociation identity for iterated norms.

# %%
import numpy as np

from banach_ito import corpus
from banach_ito.mspace import (FiniteMeasureSpace, LinearOperator, cauchy_schwarz_residual,
                               dominating_operator, domination_gap, fubini_norm_check, l2_norm, m_norm,
                               product_space_norms)
from banach_ito.spaces import Lp, SupGrid

rng = np.random.default_rng(3)
mu = FiniteMeasureSpace([0.5, 1.0, 2.0])
X = Lp((1.0, 0.5, 2.0, 1.0), 4.0)
x, y = corpus.random_coords(rng, X, 3), corpus.random_coords(rng, X, 3)
print("||x||_M =", m_norm(x, X, mu), "  ||x||_L2 =", l2_norm(x, X, mu))
print("Cauchy-Schwarz (lhs, rhs, ok):", cauchy_schwarz_residual(x, y, X, mu))

# %% [markdown]
# A linear map `A` between coordinate spaces is dominated by the
# positive operator `B = diag(rowsum|A|) |A|`: `(Ax)^2 <= B(x^2)`.

# %%
A = LinearOperator(rng.standard_normal((3, 4)), X, SupGrid(3))
B = dominating_operator(A)
print(B.matrix.round(3))
print("smallest gap on 1000 samples:", domination_gap(A, B, corpus.random_coords(rng, X, 1000)))

# %%
m_prod, m_pair, ratio = product_space_norms(x, x, X, X, mu)
print("equal pair: ratio =", ratio)
m_prod, m_pair, ratio = product_space_norms(x, y, X, X, mu)
print("random pair: ratio =", round(ratio, 4), "(always in [1, 2])")

# %%
lam = FiniteMeasureSpace([1.0, 0.25])
grid = rng.standard_normal((3, 2, X.dim))
print("iterated vs product-measure norm:", fubini_norm_check(grid, X, mu, lam))
