"""Circulant vertex couplings and the on-shell scattering matrix.

A vertex of degree N carries the boundary condition

    (U - I) Psi + i ell (U + I) Psi' = 0,

with U unitary, Psi the boundary values and Psi' the outward derivatives of
the N edge functions. The built-in couplings are multiples of the cyclic
shift R, whose entry (j, j+1 mod N) is one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError, NumericSingularityError

VARIANTS = ("minusR", "R", "phasedR")

# S-matrix denominators above this condition number count as singular.
SINGULAR_COND = 1e12


@dataclass(frozen=True, eq=False)
class VertexCoupling:
    """Unitary vertex coupling of a given degree and length scale."""

    degree: int
    matrix: np.ndarray
    ell: float
    variant: str = "custom"
    mu: float | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.degree, self.degree):
            raise InvalidArgumentError(
                f"matrix shape {m.shape} does not match degree {self.degree}"
            )
        if not self.ell > 0:
            raise InvalidArgumentError(f"ell must be positive, got {self.ell}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def unitarity_defect(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u @ u.conj().T - np.eye(self.degree))))

    def is_circulant(self, tol: float = 1e-10) -> bool:
        return is_circulant(self.matrix, tol)


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Boundary values and outward derivatives of the edge functions at a vertex."""

    values: np.ndarray
    derivatives: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).ravel()
        d = np.asarray(self.derivatives, dtype=complex).ravel()
        if v.shape != d.shape:
            raise InvalidArgumentError(
                f"values ({v.size}) and derivatives ({d.size}) differ in length"
            )
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "derivatives", d)


@dataclass(frozen=True, eq=False)
class SMatrix:
    k: float
    entries: np.ndarray

    def unitarity_defect(self) -> float:
        s = self.entries
        return float(np.max(np.abs(s @ s.conj().T - np.eye(s.shape[0]))))


class SMatrixLimits(NamedTuple):
    limit_inf: np.ndarray
    limit_zero: np.ndarray
    zero_is_minus_identity: bool


def shift_matrix(degree: int) -> np.ndarray:
    """Cyclic shift R with R[j, j+1 mod N] = 1."""
    return np.roll(np.eye(degree), 1, axis=1)


def is_circulant(m: np.ndarray, tol: float = 1e-10) -> bool:
    n = m.shape[0]
    first = m[0]
    return all(np.max(np.abs(np.roll(first, i) - m[i])) <= tol for i in range(n))


def build_coupling(
    variant: str, degree: int, ell: float = 1.0, mu: float | None = None
) -> VertexCoupling:
    """Build one of the circulant couplings.

    Args:
        variant: ``"minusR"`` (U = -R), ``"R"`` (U = R) or ``"phasedR"``
            (U = exp(i mu) R, requires ``mu``).
        degree: number of edges N >= 2.
        ell: length scale of the boundary condition.
        mu: phase for ``phasedR``.
    """
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"unknown coupling variant {variant!r}")
    if int(degree) != degree or degree < 2:
        raise InvalidArgumentError(f"degree must be an integer >= 2, got {degree}")
    if not ell > 0:
        raise InvalidArgumentError(f"ell must be positive, got {ell}")
    degree = int(degree)
    r = shift_matrix(degree).astype(complex)
    if variant == "minusR":
        u = -r
    elif variant == "R":
        u = r
    else:
        if mu is None:
            raise InvalidArgumentError("phasedR needs a phase mu")
        phase = np.exp(1j * mu)
        # exact unit phases for multiples of pi/2 keep -R and phasedR(pi) identical
        phase = complex(round(phase.real, 15), round(phase.imag, 15))
        u = phase * r
    return VertexCoupling(degree, u, float(ell), variant, mu)


def coupling_spectrum(c: VertexCoupling) -> list[complex]:
    """Eigenvalues of U, sorted by argument in (-pi, pi], then by real part."""
    eig = np.linalg.eigvals(c.matrix)
    args = np.angle(eig)
    # -1 + (-0j) would otherwise land at -pi
    args = np.where(args <= -np.pi + 1e-12, np.pi, args)
    order = np.lexsort((eig.real, np.round(args, 12)))
    return [complex(z) for z in eig[order]]


def vertex_residual(c: VertexCoupling, b: BoundaryData) -> float:
    """Max-norm of (U - I) Psi + i ell (U + I) Psi'."""
    if b.values.size != c.degree:
        raise InvalidArgumentError(
            f"boundary data of length {b.values.size} for degree {c.degree}"
        )
    u = c.matrix
    eye = np.eye(c.degree)
    r = (u - eye) @ b.values + 1j * c.ell * (u + eye) @ b.derivatives
    return float(np.max(np.abs(r)))


def s_matrix(c: VertexCoupling, k: float) -> SMatrix:
    """On-shell S-matrix [(k ell - 1) I + (k ell + 1) U] [(k ell + 1) I + (k ell - 1) U]^-1."""
    if not k > 0:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    u = c.matrix
    eye = np.eye(c.degree)
    kl = k * c.ell
    num = (kl - 1) * eye + (kl + 1) * u
    den = (kl + 1) * eye + (kl - 1) * u
    cond = np.linalg.cond(den)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise NumericSingularityError(
            f"S-matrix denominator singular at k={k!r} (cond={cond:.3g})", k=k
        )
    # num and den are polynomials in U and commute; S = num den^-1 = (den^T \ num^T)^T
    s = np.linalg.solve(den.T, num.T).T
    return SMatrix(float(k), s)


def s_matrix_limits(degree: int) -> SMatrixLimits:
    """High- and low-momentum limits of the S-matrix for the -R coupling."""
    if int(degree) != degree or degree < 2:
        raise InvalidArgumentError(f"degree must be an integer >= 2, got {degree}")
    n = int(degree)
    eye = np.eye(n)
    limit_inf = (n - 2) / n * eye - 2 / n * (1 - eye)
    if n % 2:
        return SMatrixLimits(limit_inf, -eye, True)
    i, j = np.indices((n, n))
    sign = np.where((i - j) % 2 == 0, 1.0, -1.0)
    limit_zero = (2 - n) / n * eye + sign * (2 / n) * (1 - eye)
    return SMatrixLimits(limit_inf, limit_zero, False)
