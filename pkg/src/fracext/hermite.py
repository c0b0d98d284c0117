r"""C1 cubic Hermite spaces and the tensor-product fourth-order system.

Each node carries two degrees of freedom, the value and the (physical)
slope, numbered ``2*node`` and ``2*node + 1``. A space removes a set of them
by elimination.

On the cylinder the bilinear form
``\int y^b L_b U L_b V`` with ``L_b = D_b - d_xx`` splits over the tensor basis
``X_i(x) Y_j(y)`` into

    A = Mx (x) B + Kx (x) (C + C^T) + Dx (x) Mb

with ``Mx, Kx, Dx`` the x mass, stiffness and bending matrices and
``Mb = \int y^b Y Y``, ``C = \int y^b (D_b Y) Y``, ``B = \int y^b (D_b Y)(D_b Y)``.
Unknowns are ordered x-major: ``index = i * n_y + j``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
import scipy.sparse as sp
from scipy.special import roots_jacobi

from .errors import ContractError, DomainError
from .meshing import Partition1D
from .spectral import SpectralFunction

__all__ = [
    "HermiteSpace1D",
    "clamped_space",
    "hinged_space",
    "extension_space",
    "hermite_eval",
    "basis_matrix",
    "XFactors",
    "YFactors",
    "factor_matrices_x",
    "factor_matrices_y",
    "spectral_x_factors",
    "TensorSystem",
    "assemble",
    "assemble_factors",
    "mode_operator",
    "x_moments",
    "load_vector",
    "dump_coo",
]

VALUE, SLOPE = 0, 1


class HermiteSpace1D:
    """Piecewise cubic C1 functions on a partition, minus constrained DOFs.

    Parameters
    ----------
    partition : Partition1D
    constrained : iterable of (node, kind)
        ``kind`` is ``VALUE`` (0) or ``SLOPE`` (1); negative node numbers
        count from the right end.
    """

    def __init__(self, partition, constrained=()):
        self.partition = partition
        n_nodes = partition.nodes.size
        fixed = set()
        for node, kind in constrained:
            node = node % n_nodes
            if kind not in (VALUE, SLOPE):
                raise DomainError(f"unknown DOF kind {kind!r}")
            fixed.add(2 * node + kind)
        self.constrained = frozenset(fixed)
        self.n_dofs = 2 * n_nodes
        self.free = np.array([d for d in range(self.n_dofs) if d not in fixed], dtype=int)
        self.free_index = np.full(self.n_dofs, -1, dtype=int)
        self.free_index[self.free] = np.arange(self.free.size)

    def __repr__(self):
        return f"HermiteSpace1D(cells={self.partition.n_cells}, dim={self.dim})"

    @property
    def dim(self):
        return int(self.free.size)

    def is_free(self, node, kind):
        return self.free_index[2 * (node % (self.n_dofs // 2)) + kind] >= 0

    def expand(self, free_dofs):
        """Full DOF vector (zeros at constrained DOFs) from free values."""
        free_dofs = np.asarray(free_dofs, dtype=float)
        if free_dofs.shape[-1] == self.n_dofs:
            return free_dofs
        if free_dofs.shape[-1] != self.dim:
            raise DomainError(f"expected {self.dim} or {self.n_dofs} DOFs, got {free_dofs.shape[-1]}")
        full = np.zeros(free_dofs.shape[:-1] + (self.n_dofs,))
        full[..., self.free] = free_dofs
        return full

    def trace_vector(self):
        """``e0_j = Y_j(0)`` over the free DOFs."""
        e0 = np.zeros(self.dim)
        if self.free_index[0] >= 0:
            e0[self.free_index[0]] = 1.0
        return e0


def clamped_space(partition):
    """Value and slope vanish at both ends."""
    return HermiteSpace1D(partition, [(0, VALUE), (0, SLOPE), (-1, VALUE), (-1, SLOPE)])


def hinged_space(partition):
    """Values vanish at both ends; slopes stay free.

    This is the finite element subspace of ``H^2 cap H^1_0``, the domain of
    the Dirichlet Laplacian, and the x-space the cylinder solver uses.
    """
    return HermiteSpace1D(partition, [(0, VALUE), (-1, VALUE)])


def extension_space(partition):
    """``p'(0) = p(Y) = p'(Y) = 0``."""
    return HermiteSpace1D(partition, [(0, SLOPE), (-1, VALUE), (-1, SLOPE)])


def _shape(t, h):
    """Local basis and derivatives at reference points ``t`` on a cell of width ``h``.

    Returns arrays of shape (4, len(t)) for value, first and second derivative,
    plus ``d/y`` for a cell starting at the origin (slope-at-0 entry zeroed).
    """
    t = np.asarray(t)
    if t.dtype != np.longdouble:
        t = t.astype(float)
    t2, t3 = t * t, t * t * t
    v = np.array([1 - 3 * t2 + 2 * t3, h * (t - 2 * t2 + t3), 3 * t2 - 2 * t3, h * (t3 - t2)])
    d1 = np.array([(6 * t2 - 6 * t) / h, 1 - 4 * t + 3 * t2, (6 * t - 6 * t2) / h, 3 * t2 - 2 * t])
    d2 = np.array([(12 * t - 6) / h**2, (6 * t - 4) / h, (6 - 12 * t) / h**2, (6 * t - 2) / h])
    # derivative divided by y = t h; exact polynomials for all but the slope-at-0 function
    q = np.array([(6 * t - 6) / h**2, np.zeros_like(t), (6 - 6 * t) / h**2, (3 * t - 2) / h])
    return v, d1, d2, q


def hermite_eval(space, dofs, t, deriv=0):
    """Evaluate a Hermite function (or its first/second derivative) at ``t``.

    ``dofs`` may hold all DOFs or only the free ones.
    """
    if deriv not in (0, 1, 2):
        raise DomainError("deriv must be 0, 1 or 2")
    part = space.partition
    full = space.expand(dofs)
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = part.nodes[0], part.nodes[-1]
    tol = 1e-12 * max(1.0, abs(hi))
    if np.any(ta < lo - tol) or np.any(ta > hi + tol):
        raise DomainError(f"evaluation point outside [{lo}, {hi}]")
    cell = part.locate(ta)
    a = part.nodes[cell]
    h = part.lengths[cell]
    ref = np.clip((ta - a) / h, 0.0, 1.0)
    basis = _shape(ref, h)[deriv]
    local = np.stack([full[..., 2 * cell + k] for k in range(4)], axis=-2)
    out = np.sum(local * basis, axis=-2)
    if np.ndim(t) == 0:
        return out[..., 0] if out.ndim > 1 else float(out[0])
    return out


def basis_matrix(space, t, deriv=0):
    """Matrix ``B[p, d]`` = derivative ``deriv`` of free basis function ``d`` at ``t[p]``."""
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    part = space.partition
    cell = part.locate(ta)
    h = part.lengths[cell]
    ref = np.clip((ta - part.nodes[cell]) / h, 0.0, 1.0)
    vals = _shape(ref, h)[deriv]
    rows = np.repeat(np.arange(ta.size), 4)
    cols = (2 * cell[:, None] + np.arange(4)[None, :]).ravel()
    full = sp.coo_matrix((vals.T.ravel(), (rows, cols)), shape=(ta.size, space.n_dofs)).tocsr()
    return full[:, space.free]


def _scatter(space, locals_):
    """Sum per-cell 4x4 blocks into a sparse matrix restricted to free DOFs."""
    n_cells = space.partition.n_cells
    rows = (2 * np.arange(n_cells)[:, None] + np.arange(4)[None, :])
    r = np.repeat(rows, 4, axis=1).ravel()
    c = np.tile(rows, (1, 4)).ravel()
    data = np.asarray(locals_).ravel()
    full = sp.coo_matrix((data, (r, c)), shape=(space.n_dofs, space.n_dofs), dtype=data.dtype).tocsr()
    return full[space.free][:, space.free].tocsr()


@dataclass(frozen=True)
class XFactors:
    """x-direction matrices on free DOFs: mass, stiffness (``X'X'``), bending (``X''X''``)."""

    mass: sp.spmatrix
    stiffness: sp.spmatrix
    bending: sp.spmatrix


@dataclass(frozen=True)
class YFactors:
    """Weighted y-direction matrices on free DOFs.

    ``coupling[j, l] = \\int y^b (D_b Y_j) Y_l``.
    """

    mass: sp.spmatrix
    coupling: sp.spmatrix
    bilaplace: sp.spmatrix
    trace: np.ndarray


def factor_matrices_x(space, n_gauss=5):
    """Exact (polynomial) Gauss integration of the unweighted x matrices.

    Like the y factors, entries are accumulated in ``np.longdouble``.
    """
    xg, wg = leggauss(n_gauss)
    t = 0.5 * (xg.astype(np.longdouble) + 1)
    w = 0.5 * wg.astype(np.longdouble)
    m_loc, k_loc, d_loc = [], [], []
    for h in space.partition.lengths:
        h = np.longdouble(h)
        v, d1, d2, _ = _shape(t, h)
        ww = w * h
        m_loc.append((v * ww) @ v.T)
        k_loc.append((d1 * ww) @ d1.T)
        d_loc.append((d2 * ww) @ d2.T)
    return XFactors(_scatter(space, m_loc), _scatter(space, k_loc), _scatter(space, d_loc))


def _weighted_rule(a, h, b, n_first, n_regular):
    """Reference points and weights for ``\\int_a^{a+h} y^b g(y) dy``."""
    ld = np.longdouble
    if a == 0.0:
        xg, wg = roots_jacobi(n_first, 0.0, b)
        t = 0.5 * (xg.astype(ld) + 1)
        # t^b dt = 2^{-b-1} (1+x)^b dx, y^b dy = h^{1+b} t^b dt
        return t, wg.astype(ld) * ld(2.0) ** ld(-b - 1.0) * ld(h) ** ld(1.0 + b)
    n = n_regular if a >= 2.0 * h else 3 * n_regular
    xg, wg = leggauss(n)
    t = 0.5 * (xg.astype(ld) + 1)
    y = ld(a) + ld(h) * t
    return t, 0.5 * wg.astype(ld) * ld(h) * y ** ld(b)


def factor_matrices_y(space, order, n_first=8, n_regular=10):
    """Weighted y matrices ``Mb``, ``C``, ``B`` and the trace vector.

    On the cell touching ``y = 0`` a Gauss-Jacobi rule absorbs ``y^b``; the
    term ``(b/y) Y'`` is a polynomial there because every free basis function
    has zero slope at the origin. Other cells use Gauss-Legendre with the
    weight sampled pointwise (more points on cells close to the origin
    relative to their width).

    Local and global sums are carried in ``np.longdouble``: on graded
    meshes the entries near ``y = 0`` are large and nearly cancel against
    their neighbours, so float64 accumulation perturbs the operator by far
    more than the discretization error.

    Raises
    ------
    ContractError
        If the slope at ``y = 0`` is still a free DOF.
    """
    if space.is_free(0, SLOPE):
        raise ContractError("the y = 0 slope DOF must be eliminated before weighted assembly")
    b = np.longdouble(order.b)
    part = space.partition
    m_loc, c_loc, b_loc = [], [], []
    for a, h in zip(part.nodes[:-1], part.lengths):
        t, w = _weighted_rule(float(a), float(h), order.b, n_first, n_regular)
        a, h = np.longdouble(a), np.longdouble(h)
        v, d1, d2, q = _shape(t, h)
        if a == 0:
            over_y = q
        else:
            over_y = d1 / (a + h * t)
        dop = -d2 - b * over_y
        m_loc.append((v * w) @ v.T)
        c_loc.append((dop * w) @ v.T)
        b_loc.append((dop * w) @ dop.T)
    return YFactors(
        _scatter(space, m_loc), _scatter(space, c_loc), _scatter(space, b_loc), space.trace_vector()
    )


def spectral_x_factors(eigenvalues):
    """x factors in an eigenbasis: identity, ``diag(lambda)``, ``diag(lambda^2)``."""
    lam = np.asarray(eigenvalues, dtype=float)
    return XFactors(sp.identity(lam.size, format="csr"), sp.diags(lam).tocsr(), sp.diags(lam**2).tocsr())


@dataclass(frozen=True)
class TensorSystem:
    """Assembled operator on the free DOFs of ``x_space (x) y_space``."""

    matrix: sp.csr_matrix
    order: object
    x_factors: XFactors
    y_factors: YFactors
    x_space: HermiteSpace1D = None
    y_space: HermiteSpace1D = None
    mesh: object = None
    load: np.ndarray = None

    @property
    def shape(self):
        return self.x_factors.mass.shape[0], self.y_factors.mass.shape[0]


def assemble_factors(xf, yf):
    """``Mx (x) B + Kx (x) (C + C^T) + Dx (x) Mb``."""
    coup = (yf.coupling + yf.coupling.T).tocsr()
    a = sp.kron(xf.mass, yf.bilaplace) + sp.kron(xf.stiffness, coup) + sp.kron(xf.bending, yf.mass)
    return a.tocsr()


def assemble(order, x_space, y_space, f=None, mesh=None):
    """Assemble the cylinder system for the given spaces.

    If data ``f`` is given the load vector is attached as well.
    """
    xf = factor_matrices_x(x_space)
    yf = factor_matrices_y(y_space, order)
    a = assemble_factors(xf, yf)
    load = None if f is None else load_vector(f, order, x_space, y_space)
    if load is not None and load.size != a.shape[0]:
        raise RuntimeError("load vector does not match the assembled operator")
    return TensorSystem(a, order, xf, yf, x_space, y_space, mesh, load)


def mode_operator(yf, lam):
    """1D operator ``B + lam (C + C^T) + lam^2 Mb`` for one x-eigenmode."""
    return (yf.bilaplace + lam * (yf.coupling + yf.coupling.T) + lam * lam * yf.mass).tocsr()


def x_moments(f, x_space, n_min=8):
    """``\\int f X_i dx`` over the free x DOFs by per-cell Gauss quadrature.

    ``f`` is a :class:`SpectralFunction` on the interval or a callable.
    """
    part = x_space.partition
    if isinstance(f, SpectralFunction):
        if f.basis.dim != 1:
            raise DomainError("finite elements are implemented on the interval only")
        if not f.coeffs:
            return np.zeros(x_space.dim)
        kmax = f.max_mode
    else:
        kmax = 0
    hmax = float(part.lengths.max())
    n = int(n_min + np.ceil(2.0 * kmax * hmax))
    xg, wg = leggauss(n)
    t = 0.5 * (xg + 1.0)
    loc = []
    for a, h in zip(part.nodes[:-1], part.lengths):
        x = a + h * t
        v = _shape(t, h)[0]
        loc.append(v @ (0.5 * wg * h * np.asarray(f(x), dtype=float)))
    rows = (2 * np.arange(part.n_cells)[:, None] + np.arange(4)[None, :]).ravel()
    full = np.bincount(rows, weights=np.asarray(loc).ravel(), minlength=x_space.n_dofs)
    return full[x_space.free]


def load_vector(f, order, x_space, y_space):
    """Right-hand side ``d_s <f, X_i> Y_j(0)`` in x-major ordering."""
    return order.d_s * np.kron(x_moments(f, x_space), y_space.trace_vector())


def dump_coo(matrix, path):
    """Write ``row col value`` lines (0-based, 17 significant digits)."""
    m = sp.coo_matrix(matrix)
    order = np.lexsort((m.col, m.row))
    lines = [f"{r} {c} {v:.17g}\n" for r, c, v in zip(m.row[order], m.col[order], m.data[order])]
    Path(path).write_text("".join(lines))
