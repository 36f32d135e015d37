"""Regular hexagonal lattice with edge length l.

With the -R coupling the absolutely continuous spectrum is the set of k > 0
for which

    (3k^2 + 1)^2 cos 2kl = 1 - 6k^2 - 3k^4 + 4 d k^2 (k^2 - 1)

has a solution d in [-3/2, 3]; k = i kappa gives the negative side, and
sin kl = 0 adds flat bands at k = m pi / l. The right-hand side is affine in
d, so k belongs to the spectrum iff cos 2kl lies between the two envelope
curves obtained at d = 3 and d = -3/2. The R coupling is handled through its
envelope pair only.

All membership tests work with denominator-cleared residuals written in
terms of sin^2(kl) (sinh^2 on the negative side), which keeps full relative
accuracy for small momenta and has no pole at the envelope singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bandscan import (
    MOMENTUM_FLOOR,
    NEGATIVE,
    POSITIVE,
    BandInterval,
    ScanConfig,
    SpectrumReport,
    extract_bands,
    gaps_between,
    geometric_cluster,
    measure_fraction,
    snap_to_zero,
    sort_bands,
)
from .errors import InvalidArgumentError, UnsupportedVariantError

SQRT3 = math.sqrt(3.0)
D_MIN, D_MAX = -1.5, 3.0
HEX_VARIANTS = ("minusR", "R")


@dataclass(frozen=True)
class RegularHexProblem:
    length: float
    coupling_variant: str = "minusR"

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidArgumentError(f"length must be positive, got {self.length}")
        if self.coupling_variant not in HEX_VARIANTS:
            raise InvalidArgumentError(f"unknown variant {self.coupling_variant!r}")

    def describe(self) -> dict:
        return {"lattice": "regular-hexagonal", "length": self.length,
                "coupling": self.coupling_variant}


# --- envelope curves -------------------------------------------------------

def h_plus(k, variant: str = "minusR"):
    k2 = np.asarray(k, dtype=float) ** 2
    if variant == "minusR":
        return (1 - 18 * k2 + 9 * k2**2) / (3 * k2 + 1) ** 2
    return (k2**2 - 18 * k2 + 9) / (k2 + 3) ** 2


def h_minus(k, variant: str = "minusR"):
    k2 = np.asarray(k, dtype=float) ** 2
    if variant == "minusR":
        return (1 - 3 * k2) / (1 + 3 * k2)
    return (k2 + 3) / (k2 - 3)


def g_plus(kappa, variant: str = "minusR"):
    q2 = np.asarray(kappa, dtype=float) ** 2
    if variant == "minusR":
        return (1 + 18 * q2 + 9 * q2**2) / (3 * q2 - 1) ** 2
    return (q2**2 + 18 * q2 + 9) / (q2 - 3) ** 2


def g_minus(kappa, variant: str = "minusR"):
    q2 = np.asarray(kappa, dtype=float) ** 2
    if variant == "minusR":
        return (1 + 3 * q2) / (1 - 3 * q2)
    return (q2 + 3) / (q2 - 3)


@dataclass(frozen=True)
class EnvelopePair:
    """The two curves bounding the admissible region of cos 2kl (or cosh 2 kappa l)."""

    side: str
    variant: str = "minusR"

    def upper(self, x):
        return (h_plus if self.side == POSITIVE else g_plus)(x, self.variant)

    def lower(self, x):
        return (h_minus if self.side == POSITIVE else g_minus)(x, self.variant)

    def bounds(self, x):
        """Pointwise (min, max) of the pair; the curves swap order along the axis."""
        u, w = self.upper(x), self.lower(x)
        return np.minimum(u, w), np.maximum(u, w)


# --- cleared residuals ----------------------------------------------------

def _sin2(x):
    return np.sin(x) ** 2


def _sinh2(x):
    with np.errstate(over="ignore"):
        return np.sinh(x) ** 2


def _times(a, big):
    # a * big with 0 * inf read as 0
    with np.errstate(invalid="ignore", over="ignore"):
        return np.where(a == 0, 0.0, a * big)


def hex_secular_cleared(p: RegularHexProblem, k, d):
    """(3k^2+1)^2 cos 2kl - (1 - 6k^2 - 3k^4 + 4 d k^2 (k^2 - 1)); -R coupling only."""
    if p.coupling_variant != "minusR":
        raise UnsupportedVariantError(
            "the quasimomentum-resolved condition is only available for -R"
        )
    k = np.asarray(k, dtype=float)
    k2 = k * k
    # cos 2kl = 1 - 2 sin^2 kl removes the O(1) cancellation
    return 12 * k2 * k2 + 12 * k2 - 2 * (3 * k2 + 1) ** 2 * _sin2(k * p.length) \
        - 4 * np.asarray(d, dtype=float) * k2 * (k2 - 1)


def hex_secular_cleared_negative(p: RegularHexProblem, kappa, d):
    """(3kappa^2-1)^2 cosh 2 kappa l - (1 + 6kappa^2 - 3kappa^4 + 4 d kappa^2 (kappa^2 + 1))."""
    if p.coupling_variant != "minusR":
        raise UnsupportedVariantError(
            "the quasimomentum-resolved condition is only available for -R"
        )
    q = np.asarray(kappa, dtype=float)
    q2 = q * q
    x = 3 * q2 - 1
    return 12 * q2 * q2 - 12 * q2 + _times(2 * x * x, _sinh2(q * p.length)) \
        - 4 * np.asarray(d, dtype=float) * q2 * (q2 + 1)


def positive_endpoint_residuals(p: RegularHexProblem, k):
    """Signed residuals of cos 2kl against the upper and lower envelopes (cleared)."""
    k = np.asarray(k, dtype=float)
    k2 = k * k
    s2 = _sin2(k * p.length)
    if p.coupling_variant == "minusR":
        w = 3 * k2 + 1
        upper = 24 * k2 - 2 * w * w * s2
        lower = 2 * w * (3 * k2 - w * s2)
    else:
        w = k2 + 3
        y = 3 - k2
        upper = 24 * k2 - 2 * w * w * s2
        lower = y * (6 - 2 * y * s2)
    return upper, lower


def negative_endpoint_residuals(p: RegularHexProblem, kappa):
    """Signed residuals of cosh 2 kappa l against the envelopes (cleared)."""
    q = np.asarray(kappa, dtype=float)
    q2 = q * q
    sh2 = _sinh2(q * p.length)
    if p.coupling_variant == "minusR":
        x = 3 * q2 - 1
        upper = -24 * q2 + _times(2 * x * x, sh2)
        lower = x * (6 * q2 + _times(2 * x, sh2))
    else:
        y = 3 - q2
        upper = -24 * q2 + _times(2 * y * y, sh2)
        lower = y * (6 + _times(2 * y, sh2))
    return upper, lower


def _between(upper, lower):
    return np.sign(upper) * np.sign(lower) <= 0


def in_positive_band(p: RegularHexProblem, k):
    """True where cos 2kl lies in the closed envelope interval at k."""
    return _between(*positive_endpoint_residuals(p, k))


def in_negative_band(p: RegularHexProblem, kappa):
    """True where cosh 2 kappa l lies in the closed envelope interval at kappa."""
    return _between(*negative_endpoint_residuals(p, kappa))


def flat_band_momenta(p: RegularHexProblem, k_max: float) -> list[float]:
    if not k_max > 0:
        raise InvalidArgumentError("k_max must be positive")
    step = math.pi / p.length
    count = int(math.floor(k_max / step * (1 + 1e-14)))
    return [m * step for m in range(1, count + 1)]


def _pole(p: RegularHexProblem) -> float:
    return 1 / SQRT3 if p.coupling_variant == "minusR" else SQRT3


def compute_hex_spectrum(
    p: RegularHexProblem,
    k_max: float,
    kappa_max: float,
    cfg: ScanConfig | None = None,
) -> SpectrumReport:
    """Negative bands, positive bands, flat bands and gaps up to the given momenta."""
    if not k_max > 0 or not kappa_max > 0:
        raise InvalidArgumentError("k_max and kappa_max must be positive")
    cfg = (cfg or ScanConfig()).resolved([p.length])
    pole = _pole(p)
    # the envelope region pinches at the pole of g_-/h_- and, for -R, at k = 1
    neg_extra = geometric_cluster(pole)
    pos_extra = geometric_cluster(1.0) if p.coupling_variant == "minusR" else geometric_cluster(pole)

    neg = extract_bands(lambda q: in_negative_band(p, q), (MOMENTUM_FLOOR, kappa_max),
                        cfg, NEGATIVE, neg_extra)
    pos = extract_bands(lambda k: in_positive_band(p, k), (MOMENTUM_FLOOR, k_max),
                        cfg, POSITIVE, pos_extra)
    bands = sort_bands(snap_to_zero(neg) + snap_to_zero(pos))
    flats = [BandInterval(k, k, POSITIVE, "flat") for k in flat_band_momenta(p, k_max)]
    gaps = gaps_between(bands, (-kappa_max**2, k_max**2))
    diagnostics = {
        "grid_step": cfg.grid_step,
        "edge_tolerance": cfg.edge_tolerance,
    }
    if p.coupling_variant == "R":
        diagnostics["dispersion"] = "reconstructed"
        diagnostics["note"] = "band membership from the envelope pair only"
    return SpectrumReport(
        problem=p.describe() | {"k_max": k_max, "kappa_max": kappa_max},
        flat_bands=flats,
        ac_bands=bands,
        gaps=gaps,
        measure_fraction=measure_fraction(bands, k_max**2),
        diagnostics=diagnostics,
    )


class GapWidthPrediction(NamedTuple):
    gap: float
    band: float | None


def gap_width_prediction(p: RegularHexProblem, m: int) -> GapWidthPrediction:
    """Leading-order energy-scale widths near the m-th gap.

    -R: gap centred at k = m pi / 2l of width 8/(sqrt3 l) for even m and
    4/(sqrt3 l) for odd m. R: the two bands near k = m pi / l have width
    2 sqrt3 / l and are separated by 4 sqrt3 / l.
    """
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"m must be a positive integer, got {m}")
    l = p.length
    if p.coupling_variant == "minusR":
        gap = (8 if m % 2 == 0 else 4) / (SQRT3 * l)
        return GapWidthPrediction(gap, None)
    return GapWidthPrediction(4 * SQRT3 / l, 2 * SQRT3 / l)


class NegativeBandAsymptotics(NamedTuple):
    width: float
    separation: float


def negative_band_asymptotics(p: RegularHexProblem) -> NegativeBandAsymptotics:
    """Large-l width of each negative band and their separation, momentum scale."""
    l = p.length
    if p.coupling_variant == "minusR":
        return NegativeBandAsymptotics(
            2 / SQRT3 * math.exp(-l / SQRT3), 2 / SQRT3 * math.exp(-2 * l / SQRT3)
        )
    return NegativeBandAsymptotics(
        2 * SQRT3 * math.exp(-SQRT3 * l), 2 * SQRT3 * math.exp(-2 * SQRT3 * l)
    )
