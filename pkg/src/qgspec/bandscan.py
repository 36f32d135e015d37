"""Band extraction from boolean momentum predicates.

A predicate maps a 1-D array of momenta to a boolean array (True = in the
spectrum). Scalars must also be accepted; all predicates in this package are
vectorised numpy expressions. Predicates must be free of side effects: the
scanner may evaluate disjoint chunks of the grid from several threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericFailureError

Predicate = Callable[[np.ndarray], np.ndarray]

POSITIVE = "positive"
NEGATIVE = "negative"

# Scans start here rather than at 0, where every cleared secular function vanishes.
MOMENTUM_FLOOR = 1e-9
# Default step is capped because the envelope curves vary on an O(1) momentum scale.
MAX_DEFAULT_STEP = 1e-2


def default_grid_step(lengths: Iterable[float]) -> float:
    """pi / (400 max length), capped at MAX_DEFAULT_STEP."""
    return min(math.pi / (400.0 * max(lengths)), MAX_DEFAULT_STEP)


@dataclass(frozen=True)
class ScanConfig:
    grid_step: float | None = None
    edge_tolerance: float = 1e-10
    max_bisection_iters: int = 80
    workers: int = 1

    def __post_init__(self):
        if self.grid_step is not None:
            if not self.grid_step > 0:
                raise InvalidArgumentError("grid_step must be positive")
            if not self.edge_tolerance < self.grid_step:
                raise InvalidArgumentError("edge_tolerance must be below grid_step")
        if not self.edge_tolerance > 0:
            raise InvalidArgumentError("edge_tolerance must be positive")
        if self.max_bisection_iters < 40:
            raise InvalidArgumentError("max_bisection_iters must be at least 40")
        if self.workers < 1:
            raise InvalidArgumentError("workers must be >= 1")

    def resolved(self, lengths: Iterable[float]) -> "ScanConfig":
        """Copy with the default grid step filled in for the given edge lengths."""
        if self.grid_step is not None:
            return self
        step = default_grid_step(lengths)
        return ScanConfig(
            max(step, 10 * self.edge_tolerance),
            self.edge_tolerance,
            self.max_bisection_iters,
            self.workers,
        )


@dataclass(frozen=True)
class BandInterval:
    """Closed momentum interval of spectrum; kappa on the negative side."""

    lo: float
    hi: float
    side: str = POSITIVE
    kind: str = "ac"

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidArgumentError(f"band lo {self.lo} > hi {self.hi}")
        if self.side not in (POSITIVE, NEGATIVE):
            raise InvalidArgumentError(f"bad side {self.side!r}")
        if self.kind not in ("ac", "flat"):
            raise InvalidArgumentError(f"bad kind {self.kind!r}")
        if self.kind == "flat" and self.lo != self.hi:
            raise InvalidArgumentError("flat bands are single momenta")

    @property
    def energy_lo(self) -> float:
        return self.lo**2 if self.side == POSITIVE else -self.hi**2

    @property
    def energy_hi(self) -> float:
        return self.hi**2 if self.side == POSITIVE else -self.lo**2

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        d = asdict(self)
        d["energy_lo"] = self.energy_lo
        d["energy_hi"] = self.energy_hi
        return d


@dataclass(frozen=True)
class Gap:
    """Open energy interval free of absolutely continuous spectrum."""

    energy_lo: float
    energy_hi: float
    notes: tuple = ()

    @property
    def width(self) -> float:
        return self.energy_hi - self.energy_lo

    def momentum_bounds(self) -> tuple[float, float] | None:
        """(k_lo, k_hi) when the gap lies on the positive energy axis."""
        if self.energy_lo < 0:
            return None
        return math.sqrt(self.energy_lo), math.sqrt(self.energy_hi)

    def to_dict(self) -> dict:
        return {
            "energy_lo": self.energy_lo,
            "energy_hi": self.energy_hi,
            "notes": [dict(n) for n in self.notes],
        }


@dataclass
class SpectrumReport:
    problem: dict
    flat_bands: list[BandInterval]
    ac_bands: list[BandInterval]
    gaps: list[Gap]
    measure_fraction: float
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def bands_on(self, side: str) -> list[BandInterval]:
        return [b for b in self.ac_bands if b.side == side]

    @property
    def negative_bands(self) -> list[BandInterval]:
        return self.bands_on(NEGATIVE)

    @property
    def positive_bands(self) -> list[BandInterval]:
        return self.bands_on(POSITIVE)


def _evaluate(predicate: Predicate, grid: np.ndarray, workers: int) -> np.ndarray:
    if workers == 1 or grid.size < 2 * workers:
        return np.asarray(predicate(grid), dtype=bool)
    chunks = np.array_split(grid, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda g: np.asarray(predicate(g), dtype=bool), chunks))
    return np.concatenate(parts)


def _truth(predicate: Predicate, x: float) -> bool:
    return bool(np.asarray(predicate(np.array([x])), dtype=bool)[0])


def refine_edge(
    predicate: Predicate, inside: float, outside: float, cfg: ScanConfig
) -> float:
    """Bisect between an in-spectrum and an out-of-spectrum momentum.

    Returns a point with ``predicate == True`` within ``cfg.edge_tolerance``
    of the transition.
    """
    if not _truth(predicate, inside):
        raise InvalidArgumentError(f"predicate is false at inside={inside!r}")
    if _truth(predicate, outside):
        raise InvalidArgumentError(f"predicate is true at outside={outside!r}")
    a, b = float(inside), float(outside)
    for _ in range(cfg.max_bisection_iters):
        if abs(b - a) <= cfg.edge_tolerance:
            return a
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            return a
        if _truth(predicate, mid):
            a = mid
        else:
            b = mid
    if abs(b - a) <= cfg.edge_tolerance:
        return a
    raise NumericFailureError(
        f"edge bisection did not converge in bracket [{inside!r}, {outside!r}]"
    )


def _scan_grid(
    window: tuple[float, float], step: float, extra_points: Sequence[float]
) -> np.ndarray:
    lo, hi = window
    n = max(int(math.ceil((hi - lo) / step)), 1)
    grid = lo + step * np.arange(n + 1)
    grid[-1] = hi
    if len(extra_points):
        extra = np.asarray(extra_points, dtype=float)
        extra = extra[(extra > lo) & (extra < hi)]
        grid = np.union1d(grid, extra)
    return grid


def extract_bands(
    predicate: Predicate,
    window: tuple[float, float],
    cfg: ScanConfig,
    side: str = POSITIVE,
    extra_points: Sequence[float] = (),
) -> list[BandInterval]:
    """Sweep a grid over ``window``, bisect every boolean transition, merge runs.

    Bands closer than ``cfg.edge_tolerance`` to each other are merged.

    ``extra_points`` are sampled in addition to the uniform grid; callers use
    them to resolve features narrower than the step near known momenta.
    A band narrower than the grid spacing is found only if a sample lands in it.
    """
    lo, hi = map(float, window)
    if not hi > lo:
        raise InvalidArgumentError(f"empty window {window!r}")
    if cfg.grid_step is None:
        raise InvalidArgumentError("ScanConfig.grid_step must be resolved before scanning")
    grid = _scan_grid((lo, hi), cfg.grid_step, extra_points)
    inside = _evaluate(predicate, grid, cfg.workers)

    flips = np.flatnonzero(inside[1:] != inside[:-1])
    starts = [0] if inside[0] else []
    ends = []
    for i in flips:
        if inside[i + 1]:
            starts.append(i + 1)
        else:
            ends.append(i)
    if inside[-1]:
        ends.append(grid.size - 1)

    def edges(pair):
        s, e = pair
        left = grid[s] if s == 0 else refine_edge(predicate, grid[s], grid[s - 1], cfg)
        if e == grid.size - 1:
            right = grid[e]
        else:
            right = refine_edge(predicate, grid[e], grid[e + 1], cfg)
        return left, right

    pairs = list(zip(starts, ends))
    if cfg.workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            found = list(pool.map(edges, pairs))
    else:
        found = [edges(p) for p in pairs]
    # separations below the edge tolerance are not resolvable; such runs are
    # round-off flicker at pinch points and belong to one band
    merged = []
    for a, b in found:
        if merged and a - merged[-1][1] <= cfg.edge_tolerance:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return [BandInterval(float(a), float(b), side) for a, b in merged]


def locate_gap(
    predicate: Predicate,
    point: float,
    cfg: ScanConfig,
    max_extent: float,
    floor: float = MOMENTUM_FLOOR,
) -> tuple[float, float] | None:
    """Edges of the spectral gap containing ``point``.

    Returns ``(k_lo, k_hi)``, the in-spectrum edge points bounding the gap, or
    None if ``point`` itself belongs to the spectrum. Searches outward with
    geometrically growing offsets up to the grid step, then in grid steps.
    """
    if _truth(predicate, point):
        return None
    step = cfg.grid_step
    if step is None:
        raise InvalidArgumentError("ScanConfig.grid_step must be resolved")

    def walk(direction: int) -> float:
        prev = point
        offset = max(cfg.edge_tolerance, 1e-15 * abs(point))
        while offset <= max_extent:
            x = point + direction * offset
            if x <= floor:
                return floor
            if _truth(predicate, x):
                return refine_edge(predicate, x, prev, cfg)
            prev = x
            offset = offset * 2 if offset < step else offset + step
        raise NumericFailureError(
            f"no spectrum within {max_extent!r} of {point!r} (direction {direction:+d})"
        )

    return walk(-1), walk(+1)


def measure_fraction(bands: Sequence[BandInterval], energy: float) -> float:
    """|sigma intersected with [0, E]| / E on the energy scale (positive side only)."""
    if not energy > 0:
        raise InvalidArgumentError("energy must be positive")
    total = 0.0
    for b in bands:
        if b.side != POSITIVE or b.kind != "ac":
            continue
        lo, hi = max(b.energy_lo, 0.0), min(b.energy_hi, energy)
        if hi > lo:
            total += hi - lo
    return min(total / energy, 1.0)


def snap_to_zero(bands: list[BandInterval], floor: float = MOMENTUM_FLOOR) -> list[BandInterval]:
    """Bands that start at the scan floor are reported as reaching momentum 0."""
    out = []
    for b in bands:
        if b.lo <= floor:
            b = BandInterval(0.0, b.hi, b.side, b.kind)
        out.append(b)
    return out


def gaps_between(
    bands: Sequence[BandInterval], energy_window: tuple[float, float]
) -> list[Gap]:
    """Sorted complement of the AC bands within the energy window."""
    lo, hi = energy_window
    spans = sorted((b.energy_lo, b.energy_hi) for b in bands if b.kind == "ac")
    gaps = []
    cursor = lo
    for a, b in spans:
        if a > cursor:
            gaps.append(Gap(cursor, min(a, hi)))
        cursor = max(cursor, b)
        if cursor >= hi:
            break
    if cursor < hi:
        gaps.append(Gap(cursor, hi))
    return [g for g in gaps if g.energy_hi > g.energy_lo]


def sort_bands(bands: Iterable[BandInterval]) -> list[BandInterval]:
    return sorted(bands, key=lambda b: (b.energy_lo, b.energy_hi))


def geometric_cluster(center: float, levels: int = 46, ratio: float = 2.0) -> np.ndarray:
    """Points center*(1 +- ratio^-j), j = 1..levels, plus center itself."""
    offsets = center * ratio ** -np.arange(1, levels + 1, dtype=float)
    return np.concatenate(([center], center - offsets, center + offsets))
