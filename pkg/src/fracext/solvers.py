"""Linear solves on the cylinder, the single-mode 1D solver and trace extraction."""

from dataclasses import dataclass
import csv
import io
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, NumericError
from .hermite import basis_matrix, factor_matrices_y, hermite_eval, mode_operator

__all__ = [
    "CylinderSolution",
    "TraceFunction",
    "solve_spd",
    "solve_tensor",
    "mode_solve",
    "trace",
    "dd_residual",
    "split_matrix",
]

RTOL = 1e-10
DIRECT_LIMIT = 200_000
MAXITER = 10_000


_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ca = _SPLIT * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLIT * b
    bh = cb - (cb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def split_matrix(matrix):
    """``(hi, lo)`` float64 CSR matrices with ``hi + lo`` equal to ``matrix``.

    ``lo`` is ``None`` for a float64 input; a ``np.longdouble`` matrix is
    represented exactly by the pair.
    """
    m = sp.csr_matrix(matrix)
    m.sort_indices()
    if m.dtype != np.longdouble:
        return m.astype(float), None
    hi = m.data.astype(float)
    lo = (m.data - hi).astype(float)
    shape = m.shape
    return (
        sp.csr_matrix((hi, m.indices, m.indptr), shape=shape),
        sp.csr_matrix((lo, m.indices, m.indptr), shape=shape),
    )


def dd_residual(matrix, rhs, x_hi, x_lo=None):
    """``b - A (x_hi + x_lo)`` with roughly twice float64 precision.

    Products are split exactly and each row is summed with compensated
    (two-sum) accumulation, so the result is accurate relative to itself
    even when ``|A| |x|`` exceeds ``|b|`` by many orders of magnitude.
    ``matrix`` may be a float64 or ``np.longdouble`` sparse matrix, or a
    pair from :func:`split_matrix`.
    """
    a, a_lo = matrix if isinstance(matrix, tuple) else split_matrix(matrix)
    n = a.shape[0]
    if x_lo is None:
        x_lo = np.zeros_like(x_hi)
    counts = np.diff(a.indptr)
    rows = np.repeat(np.arange(n), counts)
    pos = np.arange(a.nnz) - a.indptr[rows]
    p, e = _two_prod(a.data, x_hi[a.indices])
    small = e + a.data * x_lo[a.indices]
    if a_lo is not None:
        small = small + a_lo.data * x_hi[a.indices]
    width = int(counts.max()) if n else 0
    grid = np.zeros((n, width))
    grid[rows, pos] = p
    total = np.asarray(rhs, dtype=float).copy()
    comp = -np.bincount(rows, weights=small, minlength=n)
    for j in range(width):
        total, err = _two_sum(total, -grid[:, j])
        comp += err
    return total + comp


def solve_spd(matrix, rhs, method="auto", rtol=RTOL):
    """Solve a sparse SPD system to relative residual ``rtol``.

    ``method`` is ``"direct"`` (sparse LU of the diagonally scaled matrix) or
    ``"cg"`` (Jacobi-preconditioned conjugate gradients from a zero initial
    guess); ``"auto"`` picks direct up to 2e5 unknowns. The result is then
    polished by iterative refinement with residuals from :func:`dd_residual`
    and the iterate kept as an unevaluated sum ``hi + lo``. On graded meshes
    the entries next to ``y = 0`` grow like ``h^-3`` and no single float64
    vector has a residual below about ``eps |A| |x|``.

    Returns
    -------
    (x_hi, x_lo) : tuple of ndarray
        The solution is ``x_hi + x_lo``; ``x_hi`` is its float64 rounding.
    residual : float
        ``||A x - b|| / ||b||``.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return (np.zeros(n), np.zeros(n)), 0.0
    if method == "auto":
        method = "direct" if n <= DIRECT_LIMIT else "cg"
    pair = split_matrix(matrix)
    a = pair[0].tocsc()
    diag = a.diagonal()
    if np.any(~(diag > 0.0)):
        raise NumericError("matrix has a non-positive diagonal entry and is not SPD")
    scale = 1.0 / np.sqrt(diag)
    if method == "direct":
        dmat = sp.diags(scale)
        try:
            lu = spla.splu((dmat @ a @ dmat).tocsc())
        except RuntimeError as exc:
            raise NumericError(f"direct factorization failed: {exc}") from None

        def correct(r):
            return scale * lu.solve(scale * r)

    elif method == "cg":
        precond = spla.LinearOperator(a.shape, matvec=lambda v: scale * scale * v)

        def correct(r):
            # a breakdown shows up as non-finite output and is reported below
            with np.errstate(divide="ignore", invalid="ignore"):
                dx, _ = spla.cg(a, r, x0=np.zeros(n), rtol=rtol, atol=0.0, maxiter=MAXITER, M=precond)
            return dx

    else:
        raise DomainError(f"unknown solver method {method!r}")
    hi = np.zeros(n)
    lo = np.zeros(n)
    r = rhs
    residual = 1.0
    for _ in range(11):
        dx = correct(r)
        if not np.all(np.isfinite(dx)):
            break
        hi, err = _two_sum(hi, dx)
        hi, lo = _two_sum(hi, lo + err)
        r = dd_residual(pair, rhs, hi, lo)
        residual = float(np.linalg.norm(r) / bnorm)
        if residual <= 0.01 * rtol:
            break
    if not np.isfinite(residual) or residual > rtol:
        raise NumericError(f"{method} solve stopped at relative residual {residual:.3e}", residual)
    return (hi, lo), residual


@dataclass(frozen=True)
class TraceFunction:
    """The discrete solution restricted to ``y = 0``, as a C1 cubic in x."""

    x_space: object
    dofs: np.ndarray

    def __call__(self, x, deriv=0):
        return hermite_eval(self.x_space, self.dofs, x, deriv)

    def to_csv(self, x):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value", "derivative"])
        for xi, v, d in zip(x, self(x), self(x, 1)):
            w.writerow([f"{xi:.17g}", f"{v:.17g}", f"{d:.17g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class CylinderSolution:
    """Discrete extension on the truncated cylinder."""

    system: object
    dofs: np.ndarray
    residual: float
    dofs_lo: np.ndarray = None

    @property
    def field(self):
        """Free DOFs as an ``(n_x, n_y)`` array."""
        return self.dofs.reshape(self.system.shape)

    def evaluate(self, x, y):
        """Values on the tensor grid ``x`` by ``y``; shape ``(len(x), len(y))``."""
        bx = basis_matrix(self.system.x_space, x)
        by = basis_matrix(self.system.y_space, y)
        return np.asarray(bx @ (by @ self.field.T).T)

    def energy(self):
        """Discrete energy ``u^T A u``, with ``A u`` formed by :func:`dd_residual`."""
        au = -dd_residual(self.system.matrix, np.zeros(self.dofs.size), self.dofs, self.dofs_lo)
        return _dot(self.dofs, self.dofs_lo, au)

    def load_energy(self, load=None):
        """``load^T u`` accumulated exactly."""
        load = self.system.load if load is None else load
        return _dot(self.dofs, self.dofs_lo, np.asarray(load, dtype=float))

    def trace(self):
        return trace(self)

    def to_csv(self, x, y):
        vals = self.evaluate(x, y)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                w.writerow([f"{xi:.17g}", f"{yj:.17g}", f"{vals[i, j]:.17g}"])
        return buf.getvalue()


def solve_tensor(system, load=None, method="auto"):
    """Solve the assembled cylinder system.

    Raises
    ------
    NumericError
        If the residual contract ``||A u - b|| <= 1e-10 ||b||`` is not met.
    """
    if load is None:
        load = system.load
    if load is None:
        raise DomainError("no load vector attached to the system")
    (hi, lo), res = solve_spd(system.matrix, load, method=method)
    return CylinderSolution(system, hi, res, lo)


def mode_solve(order, lam, F, y_space, y_factors=None):
    """Single x-eigenmode problem on the y-space.

    Solves ``(B + lam (C + C^T) + lam^2 Mb) p = d_s F e0``; ``p`` approximates
    ``lam^{-s} F psi(sqrt(lam) y)`` truncated at ``Y``.
    """
    if lam <= 0:
        raise DomainError("eigenvalue must be positive")
    yf = y_factors if y_factors is not None else factor_matrices_y(y_space, order)
    rhs = order.d_s * float(F) * yf.trace
    (p, _), _ = solve_spd(mode_operator(yf, lam), rhs)
    return p


def trace(sol):
    """Trace layer: the x-DOF column paired with the y = 0 value function."""
    e0 = sol.system.y_factors.trace
    return TraceFunction(sol.system.x_space, sol.field @ e0)


def _dot(hi, lo, v):
    lo = np.zeros_like(hi) if lo is None else lo
    terms = np.concatenate(_two_prod(hi, v) + (lo * v,))
    return math.fsum(terms)
