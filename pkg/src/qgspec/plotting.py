"""Static SVG band diagrams (graphical solution of the band conditions).

Output is byte-deterministic for fixed inputs: the SVG id salt is fixed and
the date metadata is suppressed.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bandscan import MOMENTUM_FLOOR, SpectrumReport  # noqa: E402
from .genhex import GeneralHexProblem, _affine_parts, _extrema_closed, _negative_scaled_parts  # noqa: E402
from .genhex import theta_coefficients  # noqa: E402
from .hexband import EnvelopePair, RegularHexProblem  # noqa: E402

SVG_RC = {
    "svg.hashsalt": "qgspec",
    "svg.fonttype": "none",
    "path.simplify": False,
    "font.size": 9,
}

BAND_COLOR = "tab:red"
SHADE_COLOR = "0.85"


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "qgspec"})
    plt.close(fig)


def _samples(hi: float, period: float, lo: float = MOMENTUM_FLOOR) -> np.ndarray:
    # about 60 samples per oscillation period, never fewer than 2000
    n = int(min(max(2000, 60 * (hi - lo) / period), 200_000))
    return np.linspace(lo, hi, n)


def _draw_bands(ax, report: SpectrumReport, side: str, y: float) -> None:
    for b in report.bands_on(side):
        ax.plot([b.lo, b.hi], [y, y], color=BAND_COLOR, lw=4, solid_capstyle="butt")
    if side == "positive":
        for f in report.flat_bands:
            ax.plot([f.lo], [y], marker="|", color="k", ms=8)


def plot_hex(report: SpectrumReport, p: RegularHexProblem, path: str) -> None:
    """cosh 2 kappa l (left) and cos 2kl (right) against the envelope region."""
    l = p.length
    k_max = report.problem["k_max"]
    kappa_max = report.problem["kappa_max"]
    with plt.rc_context(SVG_RC):
        fig, (axn, axp) = plt.subplots(1, 2, figsize=(10, 4), gridspec_kw={"width_ratios": [1, 2]})

        q = _samples(kappa_max, math.pi / l)
        env = EnvelopePair("negative", p.coupling_variant)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lo, hi = env.bounds(q)
            curve = np.cosh(2 * q * l)
        top = 6.0
        axn.fill_between(q, np.clip(lo, -3, top), np.clip(hi, -3, top), color=SHADE_COLOR, lw=0)
        axn.plot(q, np.where(np.abs(env.upper(q)) < 50, env.upper(q), np.nan), "b-", lw=1, label="g+")
        axn.plot(q, np.where(np.abs(env.lower(q)) < 50, env.lower(q), np.nan), "g-", lw=1, label="g-")
        axn.plot(q, np.where(curve < 50, curve, np.nan), "k-", lw=1, label="cosh 2κl")
        _draw_bands(axn, report, "negative", -2.5)
        axn.set_xlim(0, kappa_max)
        axn.set_ylim(-3, top)
        axn.set_xlabel("κ")
        axn.legend(loc="upper right", frameon=False)

        k = _samples(k_max, math.pi / l)
        env = EnvelopePair("positive", p.coupling_variant)
        lo, hi = env.bounds(k)
        axp.fill_between(k, np.clip(lo, -3, 2), np.clip(hi, -3, 2), color=SHADE_COLOR, lw=0)
        axp.plot(k, env.upper(k), "b-", lw=1, label="h+")
        axp.plot(k, env.lower(k), "g-", lw=1, label="h-")
        axp.plot(k, np.cos(2 * k * l), "k-", lw=0.6, label="cos 2kl")
        _draw_bands(axp, report, "positive", -1.6)
        axp.set_xlim(0, k_max)
        axp.set_ylim(-1.8, 1.6)
        axp.set_xlabel("k")
        axp.legend(loc="upper center", frameon=False, ncol=3)

        fig.suptitle(f"regular hexagonal lattice, l = {l:g}, coupling {p.coupling_variant}")
        fig.tight_layout()
        _save(fig, path)


def _scaled_secular_range(p: GeneralHexProblem, k, side: str):
    if side == "positive":
        P, Q = _affine_parts(p, k)
        t_min, t_max = _extrema_closed(*theta_coefficients(p, k, "positive"))
        k2 = k * k
        norm = 3 * k2 * k2 + 1 + 6 * k2 * (k2 + 1) + 3 * np.abs(Q)
    else:
        P, Q, coeffs = _negative_scaled_parts(p, k)
        t_min, t_max = _extrema_closed(*coeffs)
        k2 = k * k
        norm = 3 * k2 * k2 + 1 + 6 * k2 * np.abs(k2 - 1) + 3 * Q
    a, b = (P + Q * t_min) / norm, (P + Q * t_max) / norm
    return np.minimum(a, b), np.maximum(a, b)


def plot_genhex(report: SpectrumReport, p: GeneralHexProblem, path: str) -> None:
    """Range of the normalised secular function over the Brillouin zone; bands where it covers 0."""
    k_max = report.problem["k_max"]
    kappa_max = report.problem["kappa_max"]
    period = math.pi / max(p.lengths)
    with plt.rc_context(SVG_RC):
        fig, (axn, axp) = plt.subplots(1, 2, figsize=(10, 4), gridspec_kw={"width_ratios": [1, 2]})
        for ax, side, hi, name in ((axn, "negative", kappa_max, "κ"), (axp, "positive", k_max, "k")):
            x = _samples(hi, period)
            lo, up = _scaled_secular_range(p, x, side)
            ax.fill_between(x, lo, up, color=SHADE_COLOR, lw=0)
            ax.plot(x, lo, "g-", lw=0.6)
            ax.plot(x, up, "b-", lw=0.6)
            ax.axhline(0.0, color="k", lw=0.8)
            _draw_bands(ax, report, side, -1.1)
            ax.set_xlim(0, hi)
            ax.set_ylim(-1.2, 1.2)
            ax.set_xlabel(name)
        a, b, c = p.lengths
        fig.suptitle(f"dilated hexagonal lattice, (a, b, c) = ({a:g}, {b:g}, {c:g})")
        fig.tight_layout()
        _save(fig, path)
