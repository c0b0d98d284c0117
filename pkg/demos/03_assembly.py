# %% [markdown]
# # Tensor assembly
#
# The cylinder operator is a sum of three Kronecker products of 1D factor
# matrices: A = Mx (x) B + Kx (x) (C + C^T) + Dx (x) Mb. The x factors use
# C1 cubic Hermite elements; the y factors carry the weight y^b, integrated
# exactly by Gauss-Jacobi on the first cell.

# %%
import numpy as np

from fracext import (
    assemble,
    assemble_factors,
    eigen_interval,
    extension_space,
    factor_matrices_y,
    graded_partition,
    hinged_space,
    make_frac_order,
    mode_operator,
    parse_spectral,
    spectral_x_factors,
    uniform_partition,
)

order = make_frac_order(1.3)
xs = hinged_space(uniform_partition(1.0, 8))
ys = extension_space(graded_partition(2.0, 16, 2.0))
system = assemble(order, xs, ys, f=parse_spectral("1:1", eigen_interval()))
print("x dofs", xs.dim, " y dofs", ys.dim, " system", system.matrix.shape, " nnz", system.matrix.nnz)

# %% [markdown]
# The y-mesh is graded towards y = 0, where the solution has its singularity.

# %%
print(np.round(ys.partition.nodes[:6], 6))

# %% [markdown]
# Swapping the x factors for their eigenbasis counterparts (I, diag(lambda),
# diag(lambda^2)) makes the system block diagonal, one 1D mode operator per block.

# %%
yf = factor_matrices_y(ys, order)
lam = eigen_interval().eigenvalue(np.arange(1, 5))
a = assemble_factors(spectral_x_factors(lam), yf)
n = ys.dim
for k in range(4):
    blk = a[k * n:(k + 1) * n, k * n:(k + 1) * n].toarray()
    print(k + 1, np.max(np.abs(blk - mode_operator(yf, lam[k]).toarray())))
