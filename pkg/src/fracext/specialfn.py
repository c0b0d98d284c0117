r"""Gamma and modified Bessel functions of the second kind of real order.

:math:`K_\nu(z)` is computed with Temme's method: the order is split as
:math:`\nu = n + \mu` with :math:`|\mu| \le 1/2`, the pair
:math:`K_\mu, K_{\mu+1}` is obtained from Temme's series for :math:`z < 2` and
from Steed's continued fraction for :math:`z \ge 2`, and forward recurrence
(stable for :math:`K`) lifts it to order :math:`\nu`.

The public functions accept orders in :math:`(0, 3)`. Internal helpers accept
any real order through :math:`K_{-\nu} = K_\nu`.
"""

import math
import warnings

import numpy as np

from .errors import BesselUnderflowWarning, DomainError

__all__ = ["gamma", "bessel_k", "bessel_k_scaled"]

_EPS = 1e-16
_MAXIT = 10000
_SERIES_LIMIT = 2.0

# Taylor coefficients of 1/Gamma(1 + z) about z = 0.
_RGAMMA1P = (
    1.0, 0.5772156649015329, -0.6558780715202539, -0.04200263503409524,
    0.16653861138229148, -0.04219773455554433, -0.009621971527876973,
    0.0072189432466631, -0.0011651675918590652, -0.00021524167411495098,
    0.0001280502823881162, -2.013485478078824e-05, -1.2504934821426706e-06,
    1.133027231981696e-06, -2.056338416977607e-07, 6.116095104481416e-09,
    5.002007644469223e-09, -1.18127457048702e-09, 1.0434267116911005e-10,
    7.782263439905071e-12, -3.696805618642206e-12, 5.100370287454476e-13,
    -2.0583260535665066e-14, -5.348122539423018e-15, 1.2267786282382608e-15,
)


def gamma(x):
    """Gamma function for positive real arguments.

    Raises
    ------
    DomainError
        If ``x`` is not a finite positive number.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma requires a finite positive argument, got {x!r}")
    return math.gamma(x)


def _temme_gammas(mu):
    """Return (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for |mu| <= 1/2.

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) is summed from the odd
    Taylor terms so it stays accurate as mu -> 0.
    """
    mu2 = mu * mu
    even = 0.0
    odd = 0.0
    p = 1.0
    for k in range(0, len(_RGAMMA1P) - 1, 2):
        even += _RGAMMA1P[k] * p
        odd += _RGAMMA1P[k + 1] * p
        p *= mu2
    gampl = even + odd * mu
    gammi = even - odd * mu
    return -odd, even, gampl, gammi


def _k_pair(mu, x, scaled):
    """K_mu(x) and K_{mu+1}(x) for |mu| <= 1/2, x > 0 (optionally times e^x)."""
    xi = 1.0 / x
    if x < _SERIES_LIMIT:
        mu2 = mu * mu
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        total1 = p
        for i in range(1, _MAXIT):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            delta = c * ff
            total += delta
            total1 += c * (p - i * ff)
            if abs(delta) < abs(total) * _EPS:
                break
        kmu = total
        k1 = total1 * 2.0 * xi
        if scaled:
            ex = math.exp(x)
            kmu *= ex
            k1 *= ex
        return kmu, k1

    # Steed's algorithm for the continued fraction CF2.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) / s
    if not scaled:
        kmu *= math.exp(-x)
    k1 = kmu * (mu + x + 0.5 - h) * xi
    return kmu, k1


def _kv_scalar(nu, x, scaled=False):
    nu = abs(nu)
    n = int(nu + 0.5)
    mu = nu - n
    kmu, k1 = _k_pair(mu, x, scaled)
    two_over_x = 2.0 / x
    for i in range(1, n + 1):
        kmu, k1 = k1, (mu + i) * two_over_x * k1 + kmu
    return kmu


def _kv(nu, z, scaled=False):
    """K_nu(z) for any real order; vectorized over ``z``. No validation."""
    if np.ndim(z) == 0:
        return _kv_scalar(float(nu), float(z), scaled)
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    for idx, zz in np.ndenumerate(z):
        out[idx] = _kv_scalar(float(nu), float(zz), scaled)
    return out


def _check(nu, z):
    nu = float(nu)
    if not (0.0 < nu < 3.0) or not math.isfinite(nu):
        raise DomainError(f"Bessel order must lie in (0, 3), got {nu!r}")
    za = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(za)) or np.any(za <= 0.0):
        raise DomainError("Bessel argument must be finite and positive")
    return nu


def bessel_k(nu, z):
    r"""Modified Bessel function of the second kind :math:`K_\nu(z)`.

    Parameters
    ----------
    nu : float
        Order in (0, 3).
    z : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        :math:`K_\nu(z)`. Values that underflow are returned as 0 and a
        :class:`~fracext.errors.BesselUnderflowWarning` is issued.
    """
    nu = _check(nu, z)
    za = np.asarray(z, dtype=float)
    scaled = _kv(nu, za, scaled=True)
    with np.errstate(under="ignore"):
        out = scaled * np.exp(-za)
    if np.any((out == 0.0) & (scaled > 0.0)):
        warnings.warn(f"K_{nu}(z) underflowed to zero", BesselUnderflowWarning, stacklevel=2)
    if np.ndim(z) == 0:
        return float(out)
    return out


def bessel_k_scaled(nu, z):
    r"""Exponentially scaled :math:`e^{z} K_\nu(z)`; does not underflow."""
    nu = _check(nu, z)
    out = _kv(nu, z, scaled=True)
    return float(out) if np.ndim(z) == 0 else out
