"""Hexagonal lattice with edge lengths (a, b, c) and the -R coupling.

The generalized eigenvalue condition at momentum k and quasimomentum
theta = (theta1, theta2) reads

    (3k^4 + 1) sin ak sin bk sin ck + 2k^2 (k^2 - 1) T(theta)
        - 2k^2 (k^2 + 1) (cos ak cos bk sin ck + cos bk cos ck sin ak
                          + cos ck cos ak sin bk) = 0,

    T(theta) = sin bk cos theta2 + sin ck cos theta1 + sin ak cos(theta2 - theta1).

It is affine in T and the torus is connected, so a momentum belongs to the
spectrum iff the left side changes sign between the extrema of T. Those
extrema have closed forms for any signs of the three coefficients; a grid
search plus Newton refinement is kept as an independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .bandscan import (
    MOMENTUM_FLOOR,
    NEGATIVE,
    POSITIVE,
    BandInterval,
    Gap,
    ScanConfig,
    SpectrumReport,
    extract_bands,
    gaps_between,
    geometric_cluster,
    locate_gap,
    measure_fraction,
    snap_to_zero,
    sort_bands,
)
from .errors import InvalidArgumentError, NumericFailureError

SQRT3 = math.sqrt(3.0)
# |sin(x k)| below this times x k counts as a zero of the sine
FLAT_RTOL = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class GeneralHexProblem:
    lengths: tuple[float, float, float]

    def __post_init__(self):
        ls = tuple(float(x) for x in self.lengths)
        if len(ls) != 3 or not all(x > 0 for x in ls):
            raise InvalidArgumentError(f"need three positive lengths, got {self.lengths}")
        object.__setattr__(self, "lengths", ls)

    @property
    def a(self) -> float:
        return self.lengths[0]

    @property
    def b(self) -> float:
        return self.lengths[1]

    @property
    def c(self) -> float:
        return self.lengths[2]

    def describe(self) -> dict:
        return {"lattice": "dilated-hexagonal", "lengths": list(self.lengths),
                "coupling": "minusR"}


@dataclass(frozen=True)
class QuasiMomentum:
    theta1: float
    theta2: float

    def __post_init__(self):
        for t in (self.theta1, self.theta2):
            if not -math.pi < t <= math.pi:
                raise InvalidArgumentError(f"quasimomentum {t} outside (-pi, pi]")


class ThetaRange(NamedTuple):
    t_min: float
    t_max: float


# --- theta block ------------------------------------------------------------

def theta_coefficients(p: GeneralHexProblem, k, side: str = POSITIVE):
    """Coefficients (of cos theta2, cos theta1, cos(theta2 - theta1)) of T."""
    k = np.asarray(k, dtype=float)
    f = np.sin if side == POSITIVE else np.sinh
    return f(p.b * k), f(p.c * k), f(p.a * k)


def theta_block(coeffs, theta1, theta2):
    alpha, beta, gamma = coeffs
    return alpha * np.cos(theta2) + beta * np.cos(theta1) + gamma * np.cos(theta2 - theta1)


def min_cos_sum(x, y, z):
    """min over angles of x cos p + y cos q + z cos r with p + q + r = 0, for x, y, z >= 0.

    If the smallest coefficient s satisfies s (u + v) <= u v (u, v the other
    two) the minimum is -(x + y + z) + 2 s; otherwise it equals
    -(x^2 y^2 + y^2 z^2 + z^2 x^2) / (2 x y z).
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    s = np.minimum(np.minimum(x, y), z)
    total = x + y + z
    prod = x * y * z
    # s (u + v) <= u v, multiplied through by s >= 0
    first = s * s * (total - s) <= prod
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        second = -((x * y) ** 2 + (y * z) ** 2 + (z * x) ** 2) / (2 * prod)
    return np.where(first, -total + 2 * s, second)


def _extrema_closed(alpha, beta, gamma):
    # shifting theta1 or theta2 by pi flips the signs of two coefficients at a
    # time, so only |coefficients| and the sign of their product matter
    x, y, z = np.abs(alpha), np.abs(beta), np.abs(gamma)
    total = x + y + z
    low = min_cos_sum(x, y, z)
    even = alpha * beta * gamma >= 0
    return np.where(even, low, -total), np.where(even, total, -low)


def _block_derivatives(coeffs, t1, t2):
    alpha, beta, gamma = coeffs
    d = t2 - t1
    g1 = -beta * np.sin(t1) + gamma * np.sin(d)
    g2 = -alpha * np.sin(t2) - gamma * np.sin(d)
    h11 = -beta * np.cos(t1) - gamma * np.cos(d)
    h22 = -alpha * np.cos(t2) - gamma * np.cos(d)
    h12 = gamma * np.cos(d)
    return np.array([g1, g2]), np.array([[h11, h12], [h12, h22]])


def _refine(coeffs, t1, t2, sign: float, gtol: float, max_iter: int = 500):
    """Minimise sign*T from (t1, t2): Newton steps, gradient steps, saddle escapes."""
    th = np.array([t1, t2], dtype=float)
    scale = max(sum(abs(c) for c in coeffs), 1e-300)

    def f(x):
        return sign * theta_block(coeffs, *x)

    def descend(step):
        f0 = f(th)
        t = 1.0
        while t > 1e-14:
            cand = th + t * step
            if f(cand) < f0:
                return cand
            t *= 0.5
        return None

    for _ in range(max_iter):
        g, h = _block_derivatives(coeffs, *th)
        g, h = sign * g, sign * h
        eig, vec = np.linalg.eigh(h)
        if np.linalg.norm(g) < gtol * max(scale, 1.0):
            if eig[0] >= -1e-8 * scale:
                return float(theta_block(coeffs, *th))
            # stationary but not a minimum: leave along negative curvature
            moved = descend(0.1 * vec[:, 0])
            if moved is None:
                moved = descend(-0.1 * vec[:, 0])
            if moved is None:
                return float(theta_block(coeffs, *th))
            th = moved
            continue
        # shift the Hessian to be positive definite (pure Newton near a minimum)
        shift = max(0.0, 1e-6 * scale - eig[0])
        step = -np.linalg.solve(h + shift * np.eye(2), g)
        moved = descend(step)
        if moved is None:
            moved = descend(-g / scale)
        if moved is None:
            # no decrease possible at double precision
            return float(theta_block(coeffs, *th))
        th = moved
    raise NumericFailureError("theta refinement did not reach the gradient tolerance")


def _extrema_grid(coeffs, n: int = 96, gtol: float = 1e-10, seeds: int = 4):
    grid = np.linspace(-math.pi, math.pi, n, endpoint=False)
    t1, t2 = np.meshgrid(grid, grid, indexing="ij")
    vals = theta_block(coeffs, t1, t2).ravel()
    order = np.argsort(vals)
    t1, t2 = t1.ravel(), t2.ravel()
    t_min = min(_refine(coeffs, t1[i], t2[i], +1.0, gtol) for i in order[:seeds])
    t_max = max(_refine(coeffs, t1[i], t2[i], -1.0, gtol) for i in order[::-1][:seeds])
    return t_min, t_max


def theta_extrema(
    p: GeneralHexProblem, k: float, side: str = POSITIVE, method: str = "closed"
) -> ThetaRange:
    """Minimum and maximum of T over the Brillouin zone at fixed momentum.

    ``method="grid"`` runs a 96x96 grid seed followed by Newton refinement to
    gradient norm 1e-10 (relative to the coefficient scale).
    """
    if not k > 0:
        raise InvalidArgumentError("momentum must be positive")
    coeffs = tuple(float(c) for c in theta_coefficients(p, k, side))
    if method == "closed":
        lo, hi = _extrema_closed(*coeffs)
        return ThetaRange(float(lo), float(hi))
    if method == "grid":
        try:
            return ThetaRange(*_extrema_grid(coeffs))
        except NumericFailureError as exc:
            raise NumericFailureError(f"{exc} at momentum {k!r}") from None
    raise InvalidArgumentError(f"unknown method {method!r}")


# --- secular functions --------------------------------------------------------

def _trig(p: GeneralHexProblem, k):
    k = np.asarray(k, dtype=float)
    return (np.sin(p.a * k), np.sin(p.b * k), np.sin(p.c * k),
            np.cos(p.a * k), np.cos(p.b * k), np.cos(p.c * k))


def _affine_parts(p: GeneralHexProblem, k):
    """Secular function = P + Q T on the positive side."""
    k = np.asarray(k, dtype=float)
    sa, sb, sc, ca, cb, cc = _trig(p, k)
    k2 = k * k
    P = (3 * k2 * k2 + 1) * sa * sb * sc \
        - 2 * k2 * (k2 + 1) * (ca * cb * sc + cb * cc * sa + cc * ca * sb)
    Q = 2 * k2 * (k2 - 1)
    return P, Q


def genhex_secular(p: GeneralHexProblem, k, q: QuasiMomentum):
    """Left side of the generalized eigenvalue condition at (k, theta)."""
    P, Q = _affine_parts(p, k)
    coeffs = theta_coefficients(p, k, POSITIVE)
    return P + Q * theta_block(coeffs, q.theta1, q.theta2)


def genhex_secular_negative(p: GeneralHexProblem, kappa, q: QuasiMomentum):
    """The condition at k = i kappa with the common factor i removed (real)."""
    kappa = np.asarray(kappa, dtype=float)
    sa, sb, sc = (np.sinh(x * kappa) for x in p.lengths)
    ca, cb, cc = (np.cosh(x * kappa) for x in p.lengths)
    q2 = kappa * kappa
    T = theta_block((sb, sc, sa), q.theta1, q.theta2)
    return -(3 * q2 * q2 + 1) * sa * sb * sc + 2 * q2 * (q2 + 1) * T \
        - 2 * q2 * (q2 - 1) * (ca * cb * sc + cb * cc * sa + cc * ca * sb)


def _negative_scaled_parts(p: GeneralHexProblem, kappa):
    """Negative-side P, Q and T-coefficients, all divided by cosh(a k)cosh(b k)cosh(c k).

    The scaling is positive, so signs are unchanged, and nothing overflows.
    """
    kappa = np.asarray(kappa, dtype=float)
    ta, tb, tc = (np.tanh(x * kappa) for x in p.lengths)
    with np.errstate(over="ignore"):
        ca, cb, cc = (np.cosh(x * kappa) for x in p.lengths)
        coeffs = (tb / (ca * cc), tc / (ca * cb), ta / (cb * cc))
    q2 = kappa * kappa
    P = -(3 * q2 * q2 + 1) * ta * tb * tc - 2 * q2 * (q2 - 1) * (ta + tb + tc)
    Q = 2 * q2 * (q2 + 1)
    return P, Q, coeffs


def in_band_general(p: GeneralHexProblem, k, side: str = POSITIVE):
    """True where the secular function changes sign across the range of T."""
    if side == POSITIVE:
        P, Q = _affine_parts(p, k)
        coeffs = theta_coefficients(p, k, POSITIVE)
    elif side == NEGATIVE:
        P, Q, coeffs = _negative_scaled_parts(p, k)
    else:
        raise InvalidArgumentError(f"bad side {side!r}")
    t_min, t_max = _extrema_closed(*coeffs)
    lo, hi = P + Q * t_min, P + Q * t_max
    inside = np.sign(lo) * np.sign(hi) <= 0
    if side == POSITIVE:
        # at common Dirichlet points the function vanishes on the whole torus;
        # in floating point that is all three sines at argument-reduction round-off
        k = np.asarray(k, dtype=float)
        flat = np.ones(np.shape(k), dtype=bool)
        for x, s in zip(p.lengths, _trig(p, k)[:3]):
            flat &= np.abs(s) <= FLAT_RTOL * x * k
        inside = inside | flat
    return inside


# --- flat bands ---------------------------------------------------------------

@dataclass(frozen=True)
class CommensurabilityConfig:
    max_den: int = 10**6
    tol: float = 1e-9

    def __post_init__(self):
        if self.max_den < 1 or not self.tol > 0:
            raise InvalidArgumentError("max_den >= 1 and tol > 0 required")


@dataclass(frozen=True)
class FlatBandResult:
    momenta: list[float]
    commensurate: bool
    unit: float | None = None
    multiples: tuple[int, int, int] | None = None
    verdict: str = ""

    def to_dict(self) -> dict:
        return {"momenta": self.momenta, "commensurate": self.commensurate,
                "unit": self.unit,
                "multiples": list(self.multiples) if self.multiples else None,
                "verdict": self.verdict}


def _rational(x: float, cfg: CommensurabilityConfig) -> Fraction | None:
    fr = Fraction(x).limit_denominator(cfg.max_den)
    if abs(x - fr.numerator / fr.denominator) < cfg.tol / fr.denominator**2:
        return fr
    return None


def commensurability(p: GeneralHexProblem, cfg: CommensurabilityConfig | None = None):
    """Integers (p, q, r) with gcd 1 and unit u such that (a, b, c) = u (p, q, r), or None."""
    cfg = cfg or CommensurabilityConfig()
    a, b, c = p.lengths
    rb, rc = _rational(b / a, cfg), _rational(c / a, cfg)
    if rb is None or rc is None:
        return None
    den = math.lcm(rb.denominator, rc.denominator)
    ints = (den, rb.numerator * den // rb.denominator, rc.numerator * den // rc.denominator)
    g = math.gcd(*ints)
    ints = tuple(i // g for i in ints)
    return ints, a / ints[0]


def flat_bands_general(
    p: GeneralHexProblem, k_max: float, cfg: CommensurabilityConfig | None = None
) -> FlatBandResult:
    """Momenta where sin ak = sin bk = sin ck = 0, i.e. multiples of pi / u."""
    if not k_max > 0:
        raise InvalidArgumentError("k_max must be positive")
    found = commensurability(p, cfg)
    if found is None:
        return FlatBandResult([], False, verdict="incommensurate within tolerance")
    ints, u = found
    step = math.pi / u
    count = int(math.floor(k_max / step * (1 + 1e-14)))
    momenta = [m * step for m in range(1, count + 1)]
    return FlatBandResult(momenta, True, u, ints, f"commensurate, unit {u:.15g}")


# --- gap asymptotics near Dirichlet points ----------------------------------------

class GapPrediction(NamedTuple):
    case: str
    delta: float | None
    sign: int = 0


GAP_CASES = ("incommensurate", "commensurate_pair", "cotangent_limit", "in_spectrum", "flat_band")


def _anchor_order(p: GeneralHexProblem, anchor: str):
    names = "abc"
    if anchor not in names:
        raise InvalidArgumentError(f"anchor must be one of a, b, c; got {anchor!r}")
    i = names.index(anchor)
    others = [j for j in range(3) if j != i]
    return p.lengths[i], p.lengths[others[0]], p.lengths[others[1]]


def gap_halfwidth_prediction(
    p: GeneralHexProblem, anchor: str, m: int, zero_tol: float = 1e-8
) -> GapPrediction:
    """Leading-order halfwidth (momentum scale) of the gap predicted around k = m pi / x.

    ``x`` is the anchor length; the remaining two lengths take the roles of
    b and c in the formulas. ``delta`` is reported as an absolute value with
    its sign kept separately.
    """
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"m must be a positive integer, got {m}")
    a, b, c = _anchor_order(p, anchor)
    mp = m * math.pi
    sb, sc = math.sin(b * mp / a), math.sin(c * mp / a)
    cb, cc = math.cos(b * mp / a), math.cos(c * mp / a)
    zb, zc = abs(sb) < zero_tol, abs(sc) < zero_tol
    if zb and zc:
        return GapPrediction("flat_band", None)
    if abs(cb) < zero_tol and abs(cc) < zero_tol:
        return GapPrediction("in_spectrum", None)
    if abs(cc) < zero_tol:
        b, c, sb, sc, cb, cc = c, b, sc, sb, cc, cb
    if abs(cb) < zero_tol:
        delta = 4 * a * a / (mp**2 * (5 * a + 2 * b + 2 * c)) * cc / sc
        return GapPrediction("cotangent_limit", abs(delta), int(np.sign(delta)))
    if zc:
        b, c = c, b
        zb = True
    if zb:
        delta = 2 * a / (mp * math.sqrt(3 * a * b + a * a + b * b + 2 * b * c + 2 * a * c))
        return GapPrediction("commensurate_pair", delta, 1)
    delta = 4 * a * a * (sb * cc + sc * cb) / (mp**2 * (5 * a + 2 * b + 2 * c) * sc * sb)
    return GapPrediction("incommensurate", abs(delta), int(np.sign(delta)))


def measure_gap_halfwidth(
    p: GeneralHexProblem, anchor: str, m: int, cfg: ScanConfig | None = None
) -> tuple[float, tuple[float, float] | None]:
    """Numerical halfwidth of the gap containing k = m pi / x (0 if that point is in the spectrum)."""
    a, _, _ = _anchor_order(p, anchor)
    k0 = m * math.pi / a
    cfg = (cfg or ScanConfig()).resolved(p.lengths)
    bracket = locate_gap(lambda k: in_band_general(p, k, POSITIVE), k0, cfg,
                         max_extent=math.pi / max(p.lengths))
    if bracket is None:
        return 0.0, None
    return 0.5 * (bracket[1] - bracket[0]), bracket


# --- low energy and negative spectrum ---------------------------------------------

def band_at_zero(p: GeneralHexProblem) -> bool:
    """Whether the positive spectrum extends down to k = 0."""
    a, b, c = p.lengths
    abc = a * b * c
    s = a + b + c
    if 1 / a + 1 / b + 1 / c <= 2 * max(1 / a, 1 / b, 1 / c):
        return 4 * min(a, b, c) < abc < 4 * s
    return 2 * s - abc * (1 / a**2 + 1 / b**2 + 1 / c**2) < abc < 4 * s


def negative_bands_general(
    p: GeneralHexProblem, kappa_max: float, cfg: ScanConfig | None = None
) -> list[BandInterval]:
    """Negative-side kappa intervals, sorted by energy."""
    if not kappa_max > 0:
        raise InvalidArgumentError("kappa_max must be positive")
    cfg = (cfg or ScanConfig()).resolved(p.lengths)
    bands = extract_bands(lambda q: in_band_general(p, q, NEGATIVE),
                          (MOMENTUM_FLOOR, kappa_max), cfg, NEGATIVE,
                          geometric_cluster(1 / SQRT3))
    return sort_bands(snap_to_zero(bands))


def _classify_gaps(p: GeneralHexProblem, gaps: list[Gap]) -> list[Gap]:
    out = []
    for g in gaps:
        kb = g.momentum_bounds()
        if kb is None:
            out.append(g)
            continue
        notes = []
        for anchor, x in zip("abc", p.lengths):
            m_lo = max(1, math.ceil(kb[0] * x / math.pi))
            m_hi = math.floor(kb[1] * x / math.pi)
            for m in range(m_lo, m_hi + 1):
                pred = gap_halfwidth_prediction(p, anchor, m)
                notes.append({"anchor": anchor, "m": m, "k": m * math.pi / x,
                              "case": pred.case, "delta": pred.delta, "sign": pred.sign})
        out.append(Gap(g.energy_lo, g.energy_hi, tuple(notes)))
    return out


def compute_genhex_spectrum(
    p: GeneralHexProblem,
    k_max: float,
    kappa_max: float,
    cfg: ScanConfig | None = None,
    comm_cfg: CommensurabilityConfig | None = None,
) -> SpectrumReport:
    if not k_max > 0 or not kappa_max > 0:
        raise InvalidArgumentError("k_max and kappa_max must be positive")
    cfg = (cfg or ScanConfig()).resolved(p.lengths)
    neg = negative_bands_general(p, kappa_max, cfg)
    pos = extract_bands(lambda k: in_band_general(p, k, POSITIVE),
                        (MOMENTUM_FLOOR, k_max), cfg, POSITIVE, geometric_cluster(1.0))
    bands = sort_bands(neg + snap_to_zero(pos))
    flat = flat_bands_general(p, k_max, comm_cfg)
    flats = [BandInterval(k, k, POSITIVE, "flat") for k in flat.momenta]
    gaps = _classify_gaps(p, gaps_between(bands, (-kappa_max**2, k_max**2)))
    return SpectrumReport(
        problem=p.describe() | {"k_max": k_max, "kappa_max": kappa_max},
        flat_bands=flats,
        ac_bands=bands,
        gaps=gaps,
        measure_fraction=measure_fraction(bands, k_max**2),
        diagnostics={
            "grid_step": cfg.grid_step,
            "edge_tolerance": cfg.edge_tolerance,
            "commensurability": flat.to_dict(),
            "band_at_zero": band_at_zero(p),
        },
    )
