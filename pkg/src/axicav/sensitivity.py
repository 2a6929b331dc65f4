"""Signal growth fitting, shot-noise floors, and coupling reach.

The chain is always the same: a simulated (or quoted) signal-vs-traversal
series is fitted, extrapolated to the planned number of extractions,
divided by the full beam rate to get a fractional signal, and compared to
the fractional shot noise.  Since the signal scales with the coupling
squared, the smallest measurable coupling follows by square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import density
from .cavity import MIRROR_1, CavityConfig, RunResult

DEFAULT_BEAM_RATE = 5e18  # photons/s carried by the full beam

DEFAULT_PIXEL_HALF_WIDTH_M = 1.0e-6
DEFAULT_SIDEBAND_PIXEL_CENTER_M = 3.3e-3


@dataclass(frozen=True)
class GrowthSeries:
    """Signal vs traversal count, strictly increasing in n."""

    n: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        s = np.asarray(self.signal, dtype=float)
        if n.ndim != 1 or n.shape != s.shape:
            raise ValueError("n and signal must be 1-d arrays of equal length")
        if n.size and np.any(np.diff(n) <= 0):
            raise ValueError("traversal counts must be strictly increasing")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "signal", s)

    def __len__(self) -> int:
        return self.n.size


@dataclass(frozen=True)
class GrowthFit:
    """Either signal = slope*n + intercept or signal = coefficient * n**exponent."""

    kind: str  # "linear" or "power"
    slope: float | None = None
    intercept: float | None = None
    coefficient: float | None = None
    exponent: float | None = None
    r_squared: float = 1.0

    def evaluate(self, n):
        if self.kind == "linear":
            return self.slope * np.asarray(n, dtype=float) + self.intercept
        if self.kind == "power":
            return self.coefficient * np.asarray(n, dtype=float) ** self.exponent
        raise ValueError(f"unknown fit kind {self.kind!r}")

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "r_squared": self.r_squared}
        if self.kind == "linear":
            out["slope"] = self.slope
            out["intercept"] = self.intercept
        else:
            out["coefficient"] = self.coefficient
            out["exponent"] = self.exponent
        return out


@dataclass(frozen=True)
class NoiseBudget:
    """Photon rate in the counted region and how long it is counted."""

    photon_rate: float  # photons/s
    integration_time_s: float = 1.0

    def __post_init__(self):
        if self.photon_rate <= 0 or self.integration_time_s <= 0:
            raise ValueError("rate and integration time must be > 0")


def _r_squared(y, fitted) -> float:
    res = float(np.sum((y - fitted) ** 2))
    tot = float(np.sum((y - np.mean(y)) ** 2))
    if tot == 0.0:
        return 1.0 if res == 0.0 else 0.0
    return 1.0 - res / tot


def fit_linear(series: GrowthSeries) -> GrowthFit:
    """Unweighted least-squares line through the series."""
    if len(series) < 3:
        raise ValueError("need at least 3 points to fit")
    if np.all(series.n == series.n[0]):
        raise ValueError("degenerate series: all n equal")
    slope, intercept = np.polyfit(series.n, series.signal, 1)
    fitted = slope * series.n + intercept
    return GrowthFit(
        kind="linear",
        slope=float(slope),
        intercept=float(intercept),
        r_squared=_r_squared(series.signal, fitted),
    )


def fit_power(series: GrowthSeries) -> GrowthFit:
    """Least squares in log-log space; signal = coefficient * n**exponent."""
    if len(series) < 3:
        raise ValueError("need at least 3 points to fit")
    if np.any(series.signal <= 0) or np.any(series.n <= 0):
        raise ValueError("power-law fit requires positive n and signal")
    ln, ls = np.log(series.n), np.log(series.signal)
    exponent, log_coef = np.polyfit(ln, ls, 1)
    fitted = exponent * ln + log_coef
    return GrowthFit(
        kind="power",
        coefficient=float(np.exp(log_coef)),
        exponent=float(exponent),
        r_squared=_r_squared(ls, fitted),
    )


def extrapolate(fit: GrowthFit, n: float) -> float:
    """Evaluate the fitted growth law at traversal count n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(fit.evaluate(n))


def shot_noise_fraction(budget: NoiseBudget) -> float:
    """Fractional 1/sqrt(N) fluctuation of the counted photons."""
    return 1.0 / math.sqrt(budget.photon_rate * budget.integration_time_s)


def min_coupling(g_ref: float, signal_fraction_at_ref: float, noise_fraction: float) -> float:
    """Smallest coupling whose signal still clears the noise floor.

    The fractional signal scales as (g/g_ref)^2 times the fraction measured
    at g_ref, so the threshold crossing is at
    g_min = g_ref * sqrt(noise_fraction / signal_fraction_at_ref).
    """
    if g_ref <= 0 or noise_fraction <= 0:
        raise ValueError("g_ref and noise_fraction must be > 0")
    if signal_fraction_at_ref <= 0:
        return math.inf
    return g_ref * math.sqrt(noise_fraction / signal_fraction_at_ref)


def scenario_report(
    scenario_name: str,
    fit: GrowthFit,
    n_target: int,
    g_ref: float,
    integration_time_s: float,
    total_rate: float = DEFAULT_BEAM_RATE,
    noise_fraction_1s: float | None = None,
) -> dict:
    """Bundle the full extrapolation chain into a JSON-ready report.

    noise_fraction_1s defaults to the 1-second shot noise of the full beam,
    1/sqrt(total_rate); integrating longer scales the reach by t^(-1/4)
    (noise drops as sqrt(t), coupling as the fourth root).
    """
    if noise_fraction_1s is None:
        noise_fraction_1s = shot_noise_fraction(NoiseBudget(total_rate, 1.0))
    extrapolated = extrapolate(fit, n_target)
    fraction = extrapolated / total_rate
    g1 = min_coupling(g_ref, fraction, noise_fraction_1s)
    g_t = g1 * integration_time_s ** (-0.25)
    report = {
        "scenario": scenario_name,
        "fit": fit.as_dict(),
        "extrapolated_photons": extrapolated,
        "signal_fraction": fraction,
        "noise_fraction": noise_fraction_1s,
        "g_min_1s": g1,
        "g_min_integrated": g_t,
        "integration_time_s": integration_time_s,
    }
    if not math.isfinite(g1):
        report["note"] = "no sensitivity: signal fraction is zero"
    return report


# ---------------------------------------------------------------------------
# series builders on cavity runs


def _reference_ensemble():
    from .cavity import BeamEnsemble
    from .rays import RayState

    return BeamEnsemble.single(RayState(0.0, 0.0))


def central_loss_series(
    result: RunResult,
    profile: density.GaussianProfile,
    pixel_half_width_m: float = DEFAULT_PIXEL_HALF_WIDTH_M,
) -> GrowthSeries:
    """Photon rate lost from the central pixel (a two-sided window of
    +-pixel_half_width around the axis) at each detector snapshot, relative
    to the unsplit reference beam."""
    ref = density.integrate_window(
        _reference_ensemble(), profile, -pixel_half_width_m, pixel_half_width_m
    )
    ns, vals = [], []
    for snap in result.snapshots:
        got = density.integrate_window(
            snap.ensemble, profile, -pixel_half_width_m, pixel_half_width_m
        )
        ns.append(snap.traversal)
        vals.append(ref - got)
    return GrowthSeries(np.array(ns, dtype=float), np.array(vals, dtype=float))


def sideband_gain_series(
    result: RunResult,
    profile: density.GaussianProfile,
    pixel_center_m: float = DEFAULT_SIDEBAND_PIXEL_CENTER_M,
    pixel_half_width_m: float = DEFAULT_PIXEL_HALF_WIDTH_M,
) -> GrowthSeries:
    """Photon rate gained in a narrow sideband pixel (both detector halves,
    via the symmetric doubling rule) relative to the unsplit reference."""
    lo, hi = pixel_center_m - pixel_half_width_m, pixel_center_m + pixel_half_width_m
    ref = 2.0 * density.integrate_window(_reference_ensemble(), profile, lo, hi)
    ns, vals = [], []
    for snap in result.snapshots:
        got = 2.0 * density.integrate_window(snap.ensemble, profile, lo, hi)
        ns.append(snap.traversal)
        vals.append(got - ref)
    return GrowthSeries(np.array(ns, dtype=float), np.array(vals, dtype=float))


def center_sideband_series(
    result: RunResult,
    profile: density.GaussianProfile,
    waist_m: float | None = None,
) -> GrowthSeries:
    """Change of the (center minus sidebands) observable per snapshot.

    Center is [0, waist/2] and the sidebands run from the waist out to
    4*waist + 1 mm, each doubled for the two detector halves; windows are
    integrated exactly rather than through binned counts.  The change is
    reference minus run, so photons migrating outward give a growing
    positive signal (each moved photon counts twice: once missing from the
    center, once arriving in the sidebands).
    """
    if waist_m is None:
        waist_m = profile.waist_m
    hi = 4.0 * waist_m + 1.0e-3

    def a_minus_b(ens):
        a = 2.0 * density.integrate_window(ens, profile, 0.0, 0.5 * waist_m)
        b = 2.0 * density.integrate_window(ens, profile, waist_m, hi)
        return a - b

    ref = a_minus_b(_reference_ensemble())
    ns, vals = [], []
    for snap in result.snapshots:
        ns.append(snap.traversal)
        vals.append(ref - a_minus_b(snap.ensemble))
    return GrowthSeries(np.array(ns, dtype=float), np.array(vals, dtype=float))


def suggested_fit_kind(config: CavityConfig) -> str:
    """Linear growth is the confocal behavior; the defocusing pair grows
    super-linearly, so extraction through mirror 1 with a defocusing far
    mirror defaults to a power law."""
    if config.extraction_mirror == MIRROR_1 and (
        config.mirror2_focal_m is not None and config.mirror2_focal_m < 0
    ):
        return "power"
    return "linear"
