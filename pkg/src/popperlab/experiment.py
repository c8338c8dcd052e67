"""Detector-plane statistics: seeded sampling, histograms and scenario runs.

Sampling draws positions from |ψ|² by inverting the cumulative trapezoid of
the grid density with linear interpolation inside cells, driven by the
portable xoshiro generator, so a (config, seed) pair pins every count in the
output bit-for-bit.  Coincidence runs sample the joint density by drawing y₁
from its marginal and then y₂ from the conditional slice, blended linearly
between the two neighbouring grid rows; the stream is consumed as n uniforms
for the y₁ draws followed by n uniforms for the y₂ draws.

``run_scenario`` is the whole tabletop: build the pair, record closed-form
and grid-measured spreads, optionally reduce behind the pointer, fly to the
detector plane, sample, and bin.  Every numeric field in the report is tagged
with the grid that produced it, and timings live in their own block so that
reports stay byte-comparable across runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .analytic import (
    approx_dp2_strong_correlation,
    initial_spreads,
    is_disentangled,
    position_correlation,
    reduced_spreads,
)
from .errors import ScenarioFailure, UserParameterError
from .evolution import EvolutionParams, free_propagate, gaussian_width_at
from .measurement import conditional_reduce
from .params import DetectorGeometry, GridSpec, ScenarioConfig, validate
from .rng import Xoshiro256StarStar
from .states import JointStateRecipe, build_joint_state, build_pointer_state
from .wavefunction import (
    WaveFunction1D,
    WaveFunction2D,
    grid_points,
    marginal_density,
    momentum_std_spectral,
    position_stats,
    schmidt,
    trap_weights,
)

SCHMIDT_MAX_POINTS = 2048
_SAMPLE_CHUNK = 4096


@dataclass(frozen=True)
class DetectorHistogram:
    """Counts per bin plus everything that fell off the detector."""

    geometry: DetectorGeometry
    counts: np.ndarray
    underflow: int
    overflow: int
    total: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)

    @property
    def edges(self) -> np.ndarray:
        lo, hi = self.geometry.y_range
        return np.linspace(lo, hi, self.geometry.n_bins + 1)


def cumulative_distribution(grid: GridSpec, density: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Grid points and the normalized cumulative trapezoid of a density."""
    y = grid_points(grid)
    seg = 0.5 * (density[:-1] + density[1:]) * grid.dy
    c = np.concatenate(([0.0], np.cumsum(seg)))
    total = c[-1]
    if total <= 0:
        raise ValueError("density integrates to zero")
    return y, c / total


def _invert_cdf(y: np.ndarray, c: np.ndarray, u: np.ndarray,
                dy: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map uniforms through the piecewise-linear inverse CDF.

    Returns the positions plus (cell index, in-cell fraction) so joint
    sampling can reuse the cell for its conditional slice.
    """
    idx = np.clip(np.searchsorted(c, u, side="right") - 1, 0, len(c) - 2)
    denom = c[idx + 1] - c[idx]
    frac = np.where(denom > 0, (u - c[idx]) / np.where(denom > 0, denom, 1.0), 0.0)
    frac = np.clip(frac, 0.0, 1.0)
    return y[idx] + frac * dy, idx, frac


def sample_positions(wf: WaveFunction1D, n: int, seed: int) -> np.ndarray:
    """n deterministic draws from |ψ(y)|² dy."""
    if n == 0:
        return np.empty(0)
    y, c = cumulative_distribution(wf.grid, np.abs(wf.amps) ** 2)
    u = Xoshiro256StarStar(seed).uniforms(n)
    values, _, _ = _invert_cdf(y, c, u, wf.grid.dy)
    return values


def sample_joint(psi: WaveFunction2D, n: int, seed: int) -> np.ndarray:
    """n deterministic (y₁, y₂) coincidence draws from the joint density."""
    if n == 0:
        return np.empty((0, 2))
    dens = np.abs(psi.amps) ** 2
    w2 = trap_weights(psi.grid2)
    y1, c1 = cumulative_distribution(psi.grid1, dens @ w2)
    # Row-wise cumulative trapezoid along y2, one row per y1 grid line.
    seg = 0.5 * (dens[:, :-1] + dens[:, 1:]) * psi.grid2.dy
    rows = np.concatenate((np.zeros((dens.shape[0], 1)), np.cumsum(seg, axis=1)), axis=1)
    y2grid = grid_points(psi.grid2)

    gen = Xoshiro256StarStar(seed)
    u1 = gen.uniforms(n)
    u2 = gen.uniforms(n)
    out = np.empty((n, 2))
    out[:, 0], idx1, frac1 = _invert_cdf(y1, c1, u1, psi.grid1.dy)
    for lo in range(0, n, _SAMPLE_CHUNK):
        hi = min(lo + _SAMPLE_CHUNK, n)
        i = idx1[lo:hi]
        f = frac1[lo:hi, None]
        cond = rows[i, :] * (1.0 - f) + rows[i + 1, :] * f
        total = cond[:, -1:]
        total = np.where(total > 0, total, 1.0)
        target = u2[lo:hi, None] * total
        j = np.clip((cond <= target).sum(axis=1) - 1, 0, rows.shape[1] - 2)
        take = np.arange(len(i))
        denom = cond[take, j + 1] - cond[take, j]
        frac2 = np.where(denom > 0, (target[:, 0] - cond[take, j]) / np.where(denom > 0, denom, 1.0), 0.0)
        out[lo:hi, 1] = y2grid[j] + np.clip(frac2, 0.0, 1.0) * psi.grid2.dy
    return out


def histogram(samples: np.ndarray, geometry: DetectorGeometry) -> DetectorHistogram:
    """Bin samples on the detector; bins are [lo+iw, lo+(i+1)w), last bin closed."""
    lo, hi = geometry.y_range
    width = (hi - lo) / geometry.n_bins
    idx = np.floor((samples - lo) / width).astype(np.int64)
    idx[samples == hi] = geometry.n_bins - 1
    underflow = int(np.sum(idx < 0))
    overflow = int(np.sum(idx >= geometry.n_bins))
    kept = idx[(idx >= 0) & (idx < geometry.n_bins)]
    counts = np.bincount(kept, minlength=geometry.n_bins)
    return DetectorHistogram(
        geometry=geometry,
        counts=counts,
        underflow=underflow,
        overflow=overflow,
        total=int(samples.size),
    )


def chi_square_against_density(hist: DetectorHistogram, grid: GridSpec,
                               density: np.ndarray,
                               min_expected: float = 5.0) -> tuple[float, int, float]:
    """χ² of observed bin counts against quadrature bin probabilities.

    Bins with expected count below ``min_expected`` are excluded and the
    remaining probabilities renormalized (conditional goodness of fit).
    Returns (statistic, degrees of freedom, p-value).
    """
    y, c = cumulative_distribution(grid, density)
    cdf_at = np.interp(hist.edges, y, c, left=0.0, right=1.0)
    probs = np.diff(cdf_at)
    counts = hist.counts.astype(float)
    expected = probs * hist.total
    keep = expected >= min_expected
    if keep.sum() < 2:
        raise ValueError("fewer than two usable histogram bins")
    p = probs[keep] / probs[keep].sum()
    obs = counts[keep]
    n_kept = obs.sum()
    exp = n_kept * p
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = int(keep.sum() - 1)
    return stat, dof, float(sps.chi2.sf(stat, dof))


def ks_against_density(samples: np.ndarray, grid: GridSpec,
                       density: np.ndarray) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value against the grid CDF."""
    y, c = cumulative_distribution(grid, density)
    result = sps.ks_1samp(samples, lambda x: np.interp(x, y, c, left=0.0, right=1.0))
    return float(result.statistic), float(result.pvalue)


@dataclass(frozen=True)
class ScenarioReport:
    """Structured outcome of one scenario; see run_scenario for the layout.

    ``states`` holds the computed wavefunctions keyed by role ("joint",
    "pointer", "reduced", "detector") for callers that want to serialize or
    inspect them; it never enters the JSON document.
    """

    config: ScenarioConfig
    seed: int
    analytic: dict
    numeric: dict
    sampled: dict | None
    timings: dict
    states: dict

    def to_json_dict(self, include_timings: bool = True) -> dict:
        doc = {
            "config": self.config.to_json_dict(),
            "seed": self.seed,
            "analytic": self.analytic,
            "numeric": self.numeric,
            "sampled": self.sampled,
        }
        if include_timings:
            doc["timings"] = self.timings
        return doc


def _stage(timings: dict, name: str):
    class _Timer:
        def __enter__(self):
            self.t0 = time.perf_counter()

        def __exit__(self, exc_type, exc, tb):
            timings[name] = time.perf_counter() - self.t0
            if exc is not None and not isinstance(exc, ScenarioFailure):
                raise ScenarioFailure(name, exc) from exc

    return _Timer()


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Execute the full pipeline described by a validated configuration."""
    report = validate(config)
    if not report.ok:
        raise UserParameterError("; ".join(report.violations))

    params = config.params
    ms = config.measurement
    t_flight = config.evolution_time
    timings: dict = {}

    with _stage(timings, "build"):
        psi = build_joint_state(JointStateRecipe(params, config.grid, config.grid))
    states: dict = {"joint": psi}

    init = initial_spreads(params)
    analytic = {
        "initial": {"dy1": init.dy1, "dy2": init.dy2,
                    "dp1y": init.dp1y, "dp2y": init.dp2y},
        "position_correlation": position_correlation(params),
        "disentangled": is_disentangled(params),
        "reduced": None,
    }
    ep = EvolutionParams(time=t_flight, mass=params.mass, hbar=params.hbar)
    if ms is not None:
        closed = reduced_spreads(params, ms.epsilon)
        approx = approx_dp2_strong_correlation(params, ms.epsilon)
        analytic["reduced"] = {
            "omega": closed.omega,
            "alpha": closed.alpha,
            "dy2": closed.dy2,
            "dp2y": closed.dp2y,
            "dp1y": closed.dp1y,
            "dp2y_eps_to_zero": init.dp2y,
            "strong_correlation": {"value": approx.value, "regime_ok": approx.regime_ok},
            "detector_width_at_t": gaussian_width_at(closed.dy2, ep),
        }

    with _stage(timings, "numeric_initial"):
        st1 = position_stats(psi, particle=1)
        st2 = position_stats(psi, particle=2)
        dp2_initial = momentum_std_spectral(psi, particle=2, hbar=params.hbar)
    numeric = {
        "grid": {"n_points": config.grid.n_points, "y_min": config.grid.y_min,
                 "y_max": config.grid.y_max, "dy": config.grid.dy},
        "initial": {"dy1": st1.std, "dy2": st2.std, "dp2y": dp2_initial},
        "schmidt_entropy": None,
        "reduced": None,
        "ratios": None,
    }
    if config.grid.n_points <= SCHMIDT_MAX_POINTS:
        with _stage(timings, "schmidt"):
            numeric["schmidt_entropy"] = schmidt(psi).entropy

    sampled = None
    if ms is not None:
        with _stage(timings, "reduce"):
            phi1 = build_pointer_state(ms, config.grid)
            red = conditional_reduce(psi, phi1, params, ms.epsilon)
        states["pointer"] = phi1
        states["reduced"] = red.phi2
        numeric["reduced"] = {
            "dy2": red.dy2_numeric,
            "dp2y": red.dp2_numeric,
            "residual": red.residual,
        }
        numeric["ratios"] = {
            "dp2_post_over_initial_closed": red.dp2_closed / init.dp2y,
            "dp2_post_over_initial_numeric": red.dp2_numeric / dp2_initial,
        }
        side_state = red.phi2 if config.detector.side == "B" else phi1
        if t_flight > 0:
            with _stage(timings, "propagate"):
                side_state = free_propagate(side_state, ep)
            states["detector"] = side_state
        if config.n_samples > 0:
            with _stage(timings, "sample"):
                samples = sample_positions(side_state, config.n_samples, config.seed)
                hist = histogram(samples, config.detector)
                dens = np.abs(side_state.amps) ** 2
                ks_stat, ks_p = ks_against_density(samples, side_state.grid, dens)
            sampled = {
                "n": config.n_samples,
                "side": config.detector.side,
                "mean": float(np.mean(samples)),
                "std": float(np.std(samples)),
                "ks": {"statistic": ks_stat, "pvalue": ks_p},
                "correlation": None,
                "predicted_detector_width": gaussian_width_at(red.dy2_closed, ep),
                "histogram": _histogram_dict(hist),
            }
    elif config.n_samples > 0:
        # Coincidence mode: both particles sampled at the slit plane.
        with _stage(timings, "sample"):
            pairs = sample_joint(psi, config.n_samples, config.seed)
            column = 0 if config.detector.side == "A" else 1
            samples = pairs[:, column]
            hist = histogram(samples, config.detector)
            particle = 1 if config.detector.side == "A" else 2
            dens = marginal_density(psi, particle)
            grid = psi.grid1 if particle == 1 else psi.grid2
            ks_stat, ks_p = ks_against_density(samples, grid, dens)
            corr = float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])
        sampled = {
            "n": config.n_samples,
            "side": config.detector.side,
            "mean": float(np.mean(samples)),
            "std": float(np.std(samples)),
            "ks": {"statistic": ks_stat, "pvalue": ks_p},
            "correlation": corr,
            "predicted_detector_width": None,
            "histogram": _histogram_dict(hist),
        }

    return ScenarioReport(
        config=config,
        seed=config.seed,
        analytic=analytic,
        numeric=numeric,
        sampled=sampled,
        timings=timings,
        states=states,
    )


def _histogram_dict(hist: DetectorHistogram) -> dict:
    return {
        "n_bins": hist.geometry.n_bins,
        "y_range": list(hist.geometry.y_range),
        "side": hist.geometry.side,
        "counts": [int(x) for x in hist.counts],
        "underflow": hist.underflow,
        "overflow": hist.overflow,
        "total": hist.total,
    }
