"""Dirichlet eigenbases on the unit interval and square, spectral powers and norms.

A :class:`SpectralFunction` is a finite expansion in the eigenfunctions of
the Dirichlet Laplacian. Powers of the operator act diagonally on the
coefficients, which makes the fractional solution ``u = L^{-s} f`` exact.
"""

from dataclasses import dataclass, field
import math
import re

import numpy as np

from .errors import DomainError
from .specialfn import gamma

__all__ = [
    "FracOrder",
    "make_frac_order",
    "EigenBasis",
    "eigen_interval",
    "eigen_square",
    "SpectralFunction",
    "apply_power",
    "oracle_solve",
    "hs_norm",
    "parse_spectral",
    "format_spectral",
]


@dataclass(frozen=True)
class FracOrder:
    """Fractional order s in (1, 2) and its derived constants.

    Attributes
    ----------
    s : float
        The fractional power.
    b : float
        Weight exponent ``3 - 2s`` in (-1, 1).
    c_s : float
        Kernel normalization ``2**(1-s) / Gamma(s)``.
    d_s : float
        Flux constant ``2**b * Gamma(2-s) / Gamma(s)``.
    """

    s: float
    b: float
    c_s: float
    d_s: float


def make_frac_order(s):
    s = float(s)
    if not (1.0 < s < 2.0):
        raise DomainError(f"fractional order must satisfy 1 < s < 2, got {s!r}")
    b = 3.0 - 2.0 * s
    gs = gamma(s)
    return FracOrder(s=s, b=b, c_s=2.0 ** (1.0 - s) / gs, d_s=2.0**b * gamma(2.0 - s) / gs)


class EigenBasis:
    """Dirichlet eigenpairs of -Laplace on (0,1) or (0,1)^2.

    Modes are addressed by a 1-based flat index ``k``. On the square the flat
    order is ascending eigenvalue with lexicographic tie-break on ``(k1, k2)``.
    """

    def __init__(self, domain):
        if domain not in ("interval", "square"):
            raise DomainError(f"unknown domain {domain!r}")
        self.domain = domain
        self.dim = 1 if domain == "interval" else 2
        self._modes = []
        self._index = {}

    def __repr__(self):
        return f"EigenBasis({self.domain!r})"

    def __eq__(self, other):
        return isinstance(other, EigenBasis) and other.domain == self.domain

    def __hash__(self):
        return hash(self.domain)

    def _grow(self, count):
        # All modes inside the disc k1^2 + k2^2 <= R^2 form a complete prefix
        # of the sorted enumeration.
        radius = max(4, math.isqrt(2 * count) + 2)
        while True:
            cand = sorted(
                (k1 * k1 + k2 * k2, k1, k2)
                for k1 in range(1, radius + 1)
                for k2 in range(1, radius + 1)
                if k1 * k1 + k2 * k2 <= radius * radius
            )
            if len(cand) >= count:
                break
            radius *= 2
        self._modes = [(k1, k2) for _, k1, k2 in cand]
        self._index = {m: i + 1 for i, m in enumerate(self._modes)}

    def mode(self, k):
        """Multi-index of flat mode ``k`` (a 1-tuple on the interval)."""
        k = int(k)
        if k < 1:
            raise DomainError(f"mode index must be >= 1, got {k}")
        if self.dim == 1:
            return (k,)
        if k > len(self._modes):
            self._grow(max(k, 2 * len(self._modes)))
        return self._modes[k - 1]

    def index(self, mode):
        """Flat index of a multi-index."""
        mode = tuple(int(m) for m in mode)
        if len(mode) != self.dim or min(mode) < 1:
            raise DomainError(f"invalid mode {mode} for {self.domain}")
        if self.dim == 1:
            return mode[0]
        n = mode[0] ** 2 + mode[1] ** 2
        while mode not in self._index:
            self._grow(max(2 * len(self._modes), n + 16))
        return self._index[mode]

    def eigenvalue(self, k):
        """Eigenvalue of flat mode ``k``; ``k`` may be an integer array."""
        if self.dim == 1:
            return (np.pi * np.asarray(k, dtype=float)) ** 2 if np.ndim(k) else (math.pi * int(k)) ** 2
        if np.ndim(k):
            return np.array([self.eigenvalue(int(kk)) for kk in np.ravel(k)]).reshape(np.shape(k))
        k1, k2 = self.mode(k)
        return math.pi**2 * (k1 * k1 + k2 * k2)

    def eigenfunction(self, k, x):
        """Evaluate phi_k at points ``x`` (shape ``(..., dim)`` on the square)."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return math.sqrt(2.0) * np.sin(int(k) * np.pi * x)
        k1, k2 = self.mode(k)
        return 2.0 * np.sin(k1 * np.pi * x[..., 0]) * np.sin(k2 * np.pi * x[..., 1])


def eigen_interval():
    return EigenBasis("interval")


def eigen_square():
    return EigenBasis("square")


@dataclass(frozen=True)
class SpectralFunction:
    """Finite expansion ``sum_k c_k phi_k``.

    ``coeffs`` maps flat mode index to coefficient. Construction drops
    nothing; zero coefficients are kept if given explicitly.
    """

    basis: EigenBasis
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            k = int(k)
            if k < 1:
                raise DomainError(f"mode index must be >= 1, got {k}")
            clean[k] = float(c)
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @property
    def modes(self):
        return np.array(list(self.coeffs), dtype=int)

    @property
    def values(self):
        return np.array(list(self.coeffs.values()), dtype=float)

    @property
    def max_mode(self):
        return max(self.coeffs, default=0)

    def eigenvalues(self):
        return np.array([self.basis.eigenvalue(k) for k in self.coeffs], dtype=float)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.basis.dim == 1 else x.shape[:-1]
        out = np.zeros(shape)
        for k, c in self.coeffs.items():
            out += c * self.basis.eigenfunction(k, x)
        return out

    def __call__(self, x):
        return self.evaluate(x)

    def scale(self, factors):
        """New expansion with coefficient ``c_k * factors[i]`` (mode order)."""
        return SpectralFunction(self.basis, dict(zip(self.coeffs, self.values * np.asarray(factors))))


def apply_power(w, sigma):
    """Apply L^sigma to a finite expansion (any real ``sigma``)."""
    return w.scale(w.eigenvalues() ** float(sigma))


def oracle_solve(f, order):
    """Exact solution ``u = L^{-s} f`` of the fractional problem."""
    return apply_power(f, -order.s)


def hs_norm(w, sigma):
    """``(sum_k lambda_k^sigma |W_k|^2)^{1/2}``; negative ``sigma`` gives the dual norm."""
    if not w.coeffs:
        return 0.0
    return math.sqrt(math.fsum(w.eigenvalues() ** float(sigma) * w.values**2))


_ENTRY = re.compile(r"\s*(\d+)\s*(?:,\s*(\d+)\s*)?:\s*([^,:\s]+)\s*")


def parse_spectral(text, basis):
    """Parse ``k:c`` (interval or flat square index) or ``k,l:c`` entries.

    Entries are comma separated, e.g. ``"1:1,3:-0.5"`` or ``"1,2:1,2,1:1"``.

    Raises
    ------
    ValueError
        With the character position of the first malformed entry.
    """
    coeffs = {}
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = _ENTRY.match(text, pos)
        if m is None:
            raise ValueError(f"malformed spectral entry at position {pos}: {text[pos:]!r}")
        k, l, c = m.groups()
        try:
            value = float(c)
        except ValueError:
            raise ValueError(f"bad coefficient {c!r} at position {m.start(3)}") from None
        if l is None:
            idx = int(k)
            if idx < 1:
                raise ValueError(f"mode index must be >= 1 at position {m.start(1)}")
        else:
            if basis.dim != 2:
                raise ValueError(f"two-index entry at position {m.start(1)} on the interval")
            if int(k) < 1 or int(l) < 1:
                raise ValueError(f"mode index must be >= 1 at position {m.start(1)}")
            idx = basis.index((int(k), int(l)))
        if idx in coeffs:
            raise ValueError(f"duplicate mode at position {m.start(1)}")
        coeffs[idx] = value
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise ValueError(f"expected ',' at position {pos}")
            pos += 1
            if pos >= len(text):
                raise ValueError(f"trailing ',' at position {pos - 1}")
    return SpectralFunction(basis, coeffs)


def format_spectral(w):
    return ",".join(f"{k}:{c:.17g}" for k, c in w.coeffs.items())
