"""Negative spectrum of the N-edge star graph with the -R coupling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import build_coupling
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class StarSpectrum:
    degree: int
    ell: float
    kappas: list[float] = field(default_factory=list)

    @property
    def energies(self) -> list[float]:
        return [-kap * kap for kap in self.kappas]


def _check(degree: int, ell: float) -> int:
    if int(degree) != degree or degree < 2:
        raise InvalidArgumentError(f"degree must be an integer >= 2, got {degree}")
    if not ell > 0:
        raise InvalidArgumentError(f"ell must be positive, got {ell}")
    return int(degree)


def bound_state_count(degree: int) -> int:
    return degree // 2 if degree % 2 else (degree - 1) // 2


def star_bound_states(degree: int, ell: float = 1.0) -> StarSpectrum:
    """Closed-form bound states kappa_m = 1 / (ell tan(m pi / N)).

    The index m runs over 1..floor(N/2) for odd N and 1..floor((N-1)/2) for
    even N, so that m pi / N stays strictly below pi / 2.
    """
    n = _check(degree, ell)
    kappas = []
    for m in range(1, bound_state_count(n) + 1):
        x = m * math.pi / n
        assert math.tan(x) > 0, (n, m)
        # cos/sin is closer to the true cotangent than 1/tan (one rounding fewer)
        kappas.append(math.cos(x) / (ell * math.sin(x)))
    return StarSpectrum(n, float(ell), kappas)


def star_secular_residual(degree: int, ell: float, kappa) -> complex | np.ndarray:
    """(-1 - i kappa ell)^N + (-1)^(N-1) (-1 + i kappa ell)^N.

    Accepts scalar or array ``kappa``.
    """
    n = int(degree)
    z = np.asarray(kappa, dtype=float) * ell
    r = (-1 - 1j * z) ** n + (-1) ** (n - 1) * (-1 + 1j * z) ** n
    return complex(r) if np.ndim(r) == 0 else r


def _real_part_of_residual(degree: int, ell: float, kappa):
    # the two powers are complex conjugates: the residual is 2 Re(.) for odd N
    # and 2i Im(.) for even N, so one real component carries all the roots
    r = star_secular_residual(degree, ell, kappa)
    return np.real(r) if degree % 2 else np.imag(r)


def secular_roots(
    degree: int,
    ell: float = 1.0,
    lo: float = 1e-6,
    hi: float = 1e3,
    samples: int = 100_000,
    rtol: float = 1e-13,
) -> list[float]:
    """Roots of the star secular function found by a log-spaced sweep and bisection.

    Independent of :func:`star_bound_states`; used as its oracle.
    Returned in decreasing order to match ``StarSpectrum.kappas``.
    """
    n = _check(degree, ell)
    grid = np.geomspace(lo, hi, samples)
    f = _real_part_of_residual(n, ell, grid)
    roots = []
    exact = np.flatnonzero(f == 0)
    roots.extend(grid[exact].tolist())
    brackets = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    for i in brackets:
        a, b = grid[i], grid[i + 1]
        fa = f[i]
        while b - a > rtol * b:
            mid = 0.5 * (a + b)
            fm = _real_part_of_residual(n, ell, mid)
            if fm == 0:
                a = b = mid
                break
            if np.sign(fm) == np.sign(fa):
                a, fa = mid, fm
            else:
                b = mid
        roots.append(0.5 * (a + b))
    return sorted(roots, reverse=True)


def vertex_matrix(degree: int, ell: float, kappa: float) -> np.ndarray:
    """Matrix (U - I) - i kappa ell (U + I) acting on the amplitudes c_j.

    Boundary data of the decaying Ansatz c_j exp(-kappa x) satisfy the -R
    condition exactly when this matrix annihilates c.
    """
    u = build_coupling("minusR", degree, ell).matrix
    eye = np.eye(degree)
    return (u - eye) - 1j * kappa * ell * (u + eye)
