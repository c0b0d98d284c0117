r"""Exact extension profile, its kernel identities and the decay integrals.

Every eigenmode of the extended solution has the form
``U_k * psi(sqrt(lambda_k) * y)`` with ``psi(z) = c_s z^s K_s(z)``. The
derivatives of ``psi`` used below follow from ``(z^nu K_nu)' = -z^nu K_{nu-1}``
and ``K_nu' = -(K_{nu-1} + K_{nu+1}) / 2``.
"""

from dataclasses import dataclass, field
import csv
import io
import math
import warnings

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericError, SmallTruncationWarning
from .specialfn import _kv
from .spectral import hs_norm, oracle_solve

__all__ = [
    "psi",
    "psi_derivatives",
    "extension_solution",
    "kernel_ode_residual",
    "flux_check",
    "decay_integral",
    "mode_tail_integral",
    "DecayTable",
    "truncation_report",
]


def psi(order, z):
    """Extension profile ``c_s z^s K_s(z)``, with the limit value 1 at ``z = 0``."""
    za = np.asarray(z, dtype=float)
    if np.any(za < 0.0) or np.any(~np.isfinite(za)):
        raise DomainError("psi requires finite z >= 0")
    s = order.s
    pos = za > 0.0
    out = np.ones_like(za)
    if np.any(pos):
        zp = za[pos]
        with np.errstate(under="ignore"):
            out[pos] = order.c_s * zp**s * _kv(s, zp, scaled=True) * np.exp(-zp)
    # rounding can lift values next to z = 0 one ulp above the bound 1
    np.minimum(out, 1.0, out=out)
    return float(out) if np.ndim(z) == 0 else out


def psi_derivatives(order, z):
    """``(psi, psi', psi'', psi''')`` at ``z > 0`` from analytic Bessel derivatives."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise DomainError("psi derivatives require z > 0")
    s, c = order.s, order.c_s
    k_m3, k_m2, k_m1, k_0, k_p1 = (_kv(nu, z) for nu in (s - 3, s - 2, s - 1, s, s + 1))
    dk_m2 = -0.5 * (k_m3 + k_m1)
    dk_m1 = -0.5 * (k_m2 + k_0)
    dk_0 = -0.5 * (k_m1 + k_p1)
    ddk_m1 = -0.5 * (dk_m2 + dk_0)

    p0 = c * z**s * k_0
    p1 = -c * z**s * k_m1
    p2 = -c * (s * z ** (s - 1) * k_m1 + z**s * dk_m1)
    p3 = -c * (s * (s - 1) * z ** (s - 2) * k_m1 + 2 * s * z ** (s - 1) * dk_m1 + z**s * ddk_m1)
    return p0, p1, p2, p3


def extension_solution(f, order, y):
    """Coefficients of the extended solution at height ``y``."""
    u = oracle_solve(f, order)
    if not u.coeffs:
        return u
    return u.scale(psi(order, np.sqrt(u.eigenvalues()) * float(y)))


def _reduced_operator(order, z):
    # (D_b + 1) psi = -psi'' - (b/z) psi' + psi in the scaled variable
    p0, p1, p2, _ = psi_derivatives(order, z)
    return -p2 - order.b / z * p1 + p0


def kernel_ode_residual(order, z):
    """``|(D_b + 1) psi(z)| - 2 c_s z^{s-1} K_{s-1}(z)``."""
    za = np.asarray(z, dtype=float)
    if np.any(za <= 0.0):
        raise DomainError("kernel residual requires z > 0")
    lhs = np.abs(_reduced_operator(order, za))
    rhs = 2.0 * order.c_s * za ** (order.s - 1) * _kv(order.s - 1, za)
    out = lhs - rhs
    return float(out) if np.ndim(z) == 0 else out


def _flux_exponents(order, count):
    nu = 2.0 - order.s
    cand = sorted({round(2 * m, 12) for m in range(1, count + 1)} | {round(2 * nu + 2 * m, 12) for m in range(count)})
    return cand[:count]


def flux_check(order, lam, levels=7, rtol=1e-7):
    r"""Ratio of the boundary flux of one extension mode to ``d_s lambda^s``.

    Evaluates ``-y^b d/dy [(D_b + lambda) psi(sqrt(lambda) y)]`` at
    ``y_j = 1e-2 / sqrt(lambda) * 2**-j`` and Richardson-extrapolates to
    ``y -> 0`` using the known small-``y`` exponents ``2(2-s) + 2m`` and ``2m``.

    Raises
    ------
    NumericError
        If the last two extrapolated values disagree by more than ``rtol``.
    """
    lam = float(lam)
    if lam <= 0.0:
        raise DomainError("lambda must be positive")
    b = order.b
    root = math.sqrt(lam)
    ys = 1e-2 / root * 2.0 ** -np.arange(levels)
    z = root * ys
    p0, p1, p2, p3 = psi_derivatives(order, z)
    # d/dz of -psi'' - (b/z) psi' + psi
    dF = -p3 + b / z**2 * p1 - b / z * p2 + p1
    # y-derivative of lambda * F(sqrt(lambda) y) is lambda^{3/2} F'(z)
    flux = -(ys**b) * lam**1.5 * dF
    exps = _flux_exponents(order, levels - 1)
    table = [list(flux)]
    for p in exps:
        prev = table[-1]
        r = 2.0**p
        table.append([(r * prev[j + 1] - prev[j]) / (r - 1.0) for j in range(len(prev) - 1)])
    best = table[-1][0]
    second = table[-2][-1]
    target = order.d_s * lam**order.s
    defect = abs(best - second) / abs(target)
    if not math.isfinite(best) or defect > rtol:
        raise NumericError(f"flux extrapolation did not settle (defect {defect:.3e})", defect)
    return best / target


def decay_integral(order, lo, hi=math.inf):
    r"""``(4 c_s^2 \int_lo^hi z K_{s-1}(z)^2 dz)^{1/2}`` for scaled limits.

    The integral is accumulated over windows of doubling width starting at
    ``lo``; the factor ``exp(-2 lo)`` is pulled out so large ``lo`` does not
    underflow inside the quadrature.
    """
    lo = float(lo)
    hi = float(hi)
    if not (lo > 0.0) or not (hi > lo):
        raise DomainError(f"decay integral needs 0 < lo < hi, got ({lo}, {hi})")
    nu = order.s - 1.0

    def integrand(z):
        # z K^2 e^{2 lo} = z (e^z K)^2 e^{-2(z - lo)}
        ks = _kv(nu, z, scaled=True)
        return max(z * ks * ks * math.exp(-2.0 * (z - lo)), 1e-300)

    total = 0.0
    a = lo
    width = 1.0
    while a < hi:
        bnd = min(a + width, hi)
        piece, _ = integrate.quad(integrand, a, bnd, epsabs=0.0, epsrel=1e-12, limit=200)
        total += piece
        if piece <= 1e-17 * total:
            break
        a = bnd
        width *= 2.0
    with np.errstate(under="ignore"):
        return 2.0 * order.c_s * math.sqrt(total) * math.exp(-lo)


def mode_tail_integral(order, lam, a, b=math.inf):
    r"""``J(a, b)``: ``lambda^{-s} \int_a^b y^b |(D_b + lambda) psi(sqrt(lambda) y)|^2 dy``.

    Computed directly in the physical variable ``y`` from the analytic
    derivatives of ``psi``; it is the unscaled counterpart of
    :func:`decay_integral` and serves as its cross-check.
    """
    lam = float(lam)
    root = math.sqrt(lam)

    def integrand(y):
        z = root * y
        p0, p1, p2, _ = psi_derivatives(order, z)
        # D_b in y acting on psi(root y): -lam psi'' - (b/y) root psi'
        val = -lam * p2 - order.b / y * root * p1 + lam * p0
        return y**order.b * val * val

    val, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=1e-11, limit=400)
    return math.sqrt(lam ** (-order.s) * val)


@dataclass
class DecayTable:
    """Per-mode tail integrals beyond height ``Y``.

    ``rows`` holds ``(k, lambda_k, I_k(sqrt(lambda_k) Y, inf), contribution)``
    where the contribution is ``lambda_k^{s/2} |U_k| I_k``, so that
    ``tail_norm`` is the Euclidean norm of the contributions.
    """

    Y: float
    rows: list = field(default_factory=list)
    sup_integral: float = 0.0
    tail_norm: float = 0.0
    bound: float = 0.0

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "lambda", "I_tail", "contribution"])
        for k, lam, tail, contrib in self.rows:
            w.writerow([k, f"{lam:.17g}", f"{tail:.17g}", f"{contrib:.17g}"])
        return buf.getvalue()


def truncation_report(f, order, Y):
    """Tail of the extension beyond ``Y`` for data ``f``, mode by mode.

    Warns with :class:`SmallTruncationWarning` when ``Y < 1/sqrt(lambda_1)``.
    """
    Y = float(Y)
    if Y <= 0.0:
        raise DomainError("Y must be positive")
    lam1 = f.basis.eigenvalue(1)
    if Y < 1.0 / math.sqrt(lam1):
        warnings.warn(f"Y = {Y} is below 1/sqrt(lambda_1)", SmallTruncationWarning, stacklevel=2)
    table = DecayTable(Y=Y)
    if not f.coeffs:
        return table
    u = oracle_solve(f, order)
    sq = []
    for (k, uk), lam in zip(u.coeffs.items(), u.eigenvalues()):
        tail = decay_integral(order, math.sqrt(lam) * Y)
        contrib = lam ** (order.s / 2) * abs(uk) * tail
        table.rows.append((k, float(lam), tail, contrib))
        sq.append(contrib * contrib)
    table.sup_integral = max(r[2] for r in table.rows)
    table.tail_norm = math.sqrt(math.fsum(sq))
    table.bound = math.exp(-math.sqrt(lam1) * Y / 2) * hs_norm(f, -order.s)
    return table
