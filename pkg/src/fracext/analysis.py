"""Trace errors against the spectral oracle and convergence studies."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import csv
import io
import math
import time

import numpy as np
from numpy.polynomial.legendre import leggauss

from .hermite import assemble, clamped_space, extension_space, factor_matrices_y, hinged_space
from .meshing import CylinderMesh, graded_partition, uniform_partition
from .solvers import mode_solve, solve_tensor
from .spectral import make_frac_order, oracle_solve

__all__ = [
    "TraceError",
    "sine_coefficients",
    "trace_error",
    "trace_hs_error",
    "default_K",
    "ConvergenceRecord",
    "solve_problem",
    "truncated_energy",
    "StudyPoint",
    "Study",
    "run_study",
    "eoc_column",
    "fit_slope",
    "STUDY_HEADER",
]

STUDY_HEADER = ["s", "Y", "gamma", "Nx", "M", "err_hs", "err_l2", "energy", "eoc_hs", "wall_ms"]


def _trace_quadrature(tr, K):
    """Gauss points/weights on the trace partition, fine enough for sin(K pi x)."""
    part = tr.x_space.partition
    n = int(8 + np.ceil(2.0 * K * part.lengths.max()))
    xg, wg = leggauss(n)
    t = 0.5 * (xg + 1.0)
    x = (part.nodes[:-1, None] + part.lengths[:, None] * t[None, :]).ravel()
    w = (0.5 * part.lengths[:, None] * wg[None, :]).ravel()
    return x, w


def sine_coefficients(tr, K):
    """``(tr, phi_k)`` for ``k = 1..K`` on the interval."""
    x, w = _trace_quadrature(tr, K)
    vals = tr(x) * w
    k = np.arange(1, K + 1)
    return math.sqrt(2.0) * np.sin(np.pi * np.outer(k, x)) @ vals


@dataclass(frozen=True)
class TraceError:
    """Trace errors: H^s (first ``K`` modes), L2 (quadrature) and the discrete L2 tail."""

    hs: float
    l2: float
    tail: float


def trace_error(tr, exact, order, K):
    """Compare a discrete trace with an exact expansion.

    ``hs = (sum_{k<=K} lambda_k^s |U_k - U_k^h|^2)^{1/2}``; ``tail`` is the L2
    mass of the discrete trace outside the first ``K`` modes.
    """
    if K < exact.max_mode:
        raise ValueError(f"K = {K} is below the largest active mode {exact.max_mode}")
    coef_h = sine_coefficients(tr, K)
    coef = np.zeros(K)
    for k, c in exact.coeffs.items():
        coef[k - 1] = c
    lam = (np.pi * np.arange(1, K + 1)) ** 2
    hs = math.sqrt(math.fsum(lam**order.s * (coef - coef_h) ** 2))
    x, w = _trace_quadrature(tr, K)
    vh = tr(x)
    l2 = math.sqrt(math.fsum(w * (vh - exact(x)) ** 2))
    tail2 = math.fsum(w * vh**2) - math.fsum(coef_h**2)
    return TraceError(hs=hs, l2=l2, tail=math.sqrt(max(tail2, 0.0)))


def trace_hs_error(tr, exact, order, K):
    return trace_error(tr, exact, order, K).hs


def default_K(f):
    return max(64, 4 * f.max_mode)


@dataclass
class ConvergenceRecord:
    """One solved configuration and its errors against ``L^{-s} f``."""

    s: float
    Y: float
    gamma: float
    Nx: int
    M: int
    err_hs: float = math.nan
    err_l2: float = math.nan
    energy: float = math.nan
    residual: float = math.nan
    wall_ms: float = math.nan
    error: str = ""

    @property
    def params(self):
        return (self.s, self.Y, self.gamma, self.Nx, self.M)


X_SPACES = {"hinged": hinged_space, "clamped": clamped_space}


def solve_problem(f, s, Y, gamma, Nx, M, K=None, x_bc="hinged"):
    """Assemble, solve and measure one configuration.

    ``x_bc="clamped"`` additionally forces zero slopes at ``x = 0, 1``.
    Returns ``(solution, record)``.
    """
    t0 = time.perf_counter()
    order = make_frac_order(s)
    xs = X_SPACES[x_bc](uniform_partition(1.0, Nx))
    ys = extension_space(graded_partition(Y, M, gamma))
    mesh = CylinderMesh(xs.partition, ys.partition, gamma)
    system = assemble(order, xs, ys, f=f, mesh=mesh)
    sol = solve_tensor(system)
    exact = oracle_solve(f, order)
    err = trace_error(sol.trace(), exact, order, K or default_K(f))
    rec = ConvergenceRecord(
        s=float(s), Y=float(Y), gamma=float(gamma), Nx=int(Nx), M=int(M),
        err_hs=err.hs, err_l2=err.l2, energy=sol.load_energy(),
        residual=sol.residual, wall_ms=1e3 * (time.perf_counter() - t0),
    )
    return sol, rec


def truncated_energy(f, order, Y, M=192, gamma=1.5):
    """Energy ``d_s <f, Tr U_Y>`` of the truncated problem with exact x-modes.

    Each mode is solved on a fine graded y-mesh; the x direction is exact.
    Much finer or more strongly graded y-meshes than the default hit the
    conditioning limit of the float64 factorization.
    """
    ys = extension_space(graded_partition(Y, M, gamma))
    yf = factor_matrices_y(ys, order)
    total = 0.0
    for k, F in f.coeffs.items():
        p = mode_solve(order, f.basis.eigenvalue(k), F, ys, y_factors=yf)
        total += order.d_s * F * float(yf.trace @ p)
    return total


@dataclass(frozen=True)
class StudyPoint:
    s: float
    Y: float
    gamma: float
    Nx: int
    M: int


@dataclass
class Study:
    records: list
    eoc: list
    y_slopes: list = field(default_factory=list)

    def to_csv(self, timing=True):
        """Study table; ``timing=False`` blanks ``wall_ms`` for reproducible output."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STUDY_HEADER)
        for r, e in zip(self.records, self.eoc):
            w.writerow([
                _fmt(r.s), _fmt(r.Y), _fmt(r.gamma), r.Nx, r.M,
                _fmt(r.err_hs), _fmt(r.err_l2), _fmt(r.energy),
                "" if e is None else _fmt(e),
                f"{r.wall_ms:.3f}" if timing else "",
            ])
        return buf.getvalue()


def _fmt(x):
    return f"{x:.17g}"


def _is_halving(prev, cur):
    if prev.params[:3] != cur.params[:3]:
        return False
    steps = [(a, b) for a, b in ((prev.Nx, cur.Nx), (prev.M, cur.M))]
    if any(b not in (a, 2 * a) for a, b in steps):
        return False
    return any(b == 2 * a for a, b in steps)


def eoc_column(records):
    """``log2(e_prev / e_cur)`` where the record refines its predecessor dyadically."""
    out = [None]
    for prev, cur in zip(records, records[1:]):
        if _is_halving(prev, cur) and prev.err_hs > 0 and cur.err_hs > 0:
            out.append(math.log2(prev.err_hs / cur.err_hs))
        else:
            out.append(None)
    return out[: len(records)]


def fit_slope(x, y):
    """Least-squares slope of ``log(y)`` against ``x``."""
    return float(np.polyfit(np.asarray(x, float), np.log(np.asarray(y, float)), 1)[0])


def _y_sweeps(records):
    groups = {}
    for r in records:
        if math.isfinite(r.err_hs) and r.err_hs > 0:
            groups.setdefault((r.s, r.gamma, r.Nx, r.M), []).append(r)
    out = []
    for (s, gamma, nx, m), rs in groups.items():
        ys = sorted({r.Y for r in rs})
        if len(ys) < 2:
            continue
        rs = sorted(rs, key=lambda r: r.Y)
        out.append({
            "s": s, "gamma": gamma, "Nx": nx, "M": m,
            "Y": [r.Y for r in rs],
            "slope": fit_slope([r.Y for r in rs], [r.err_hs for r in rs]),
        })
    return out


def _run_point(f, point, K):
    try:
        return solve_problem(f, point.s, point.Y, point.gamma, point.Nx, point.M, K)[1]
    except Exception as exc:  # recorded, study continues
        return ConvergenceRecord(point.s, point.Y, point.gamma, point.Nx, point.M, error=f"{type(exc).__name__}: {exc}")


def run_study(f, points, K=None, workers=1):
    """Solve every grid point and collect errors, EOCs and Y-sweep slopes.

    Records keep the order of ``points`` regardless of ``workers``.
    """
    points = list(points)
    if not points:
        raise ValueError("study grid is empty")
    lam1 = f.basis.eigenvalue(1)
    for p in points:
        if p.Y < 1.0 / math.sqrt(lam1):
            raise ValueError(f"Y = {p.Y} is below 1/sqrt(lambda_1)")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda p: _run_point(f, p, K), points))
    else:
        records = [_run_point(f, p, K) for p in points]
    return Study(records, eoc_column(records), _y_sweeps(records))


def record_dict(rec):
    return asdict(rec)
