"""Physical parameters, grid specification and scenario configuration.

Natural units throughout: ħ = 1 and m = 1 unless overridden.  The two-particle
source is characterized by σ (relative-momentum scale of the pair) and Ω₀
(centre-of-mass length scale).  A virtual slit at station A is a Gaussian
pointer of width ε.  Everything downstream (state builders, reduction,
propagation, sampling) reads these values; nothing else carries hidden state.

Grid policy
-----------
A uniform grid must simultaneously contain the widest state it will hold
(8 position spreads per side when auto-built; 6 is the validation minimum)
and resolve the narrowest feature it will represent.  ``auto_grid`` targets
8 points per conservative feature scale min(ε, ħ/4σ, Ω₀); when that demand
overflows the point cap it degrades to the largest allowed power of two,
provided the spacing still samples every *actual* Gaussian width (pointer
width, conditional width ħ/2σ, reduced width) at ≥ 1.2 points.  Below that
floor spectral aliasing enters the 1e-6 accuracy band and the request is
refused with ``CapExceededError``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import CapExceededError

MIN_GRID_POINTS = 64
DEFAULT_MAX_POINTS = 2 ** 14
# Validation floor: user grids must cover 6 spreads per side of zero.
EXTENT_SIGMAS = 6.0
# Auto-built grids use 8 spreads so boundary amplitude stays below the
# 1e-6 tail contract (exp(-8^2/4) ~ 1e-7; 6 spreads would give ~1e-4).
AUTO_EXTENT_SIGMAS = 8.0
TARGET_POINTS_PER_SCALE = 8.0
FLOOR_POINTS_PER_WIDTH = 1.2
# The pointer builder refuses spacings coarser than eps/1.5, so degraded
# grids must honor that floor for the slit scale specifically.
POINTER_MIN_POINTS_PER_WIDTH = 1.5


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p <<= 1
    return p


def _floor_pow2(n: int) -> int:
    p = 1
    while (p << 1) <= n:
        p <<= 1
    return p


@dataclass(frozen=True, slots=True)
class PhysicalParams:
    """Source parameters σ, Ω₀ plus the unit choices ħ and m."""

    sigma: float
    omega0: float
    hbar: float = 1.0
    mass: float = 1.0


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Uniform 1D grid with both endpoints on the grid."""

    n_points: int
    y_min: float
    y_max: float

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / (self.n_points - 1)

    @property
    def half_extent(self) -> float:
        return 0.5 * (self.y_max - self.y_min)


@dataclass(frozen=True, slots=True)
class MeasurementSpec:
    """Gaussian pointer: resolution ε and slit centre."""

    epsilon: float
    center: float = 0.0


@dataclass(frozen=True, slots=True)
class DetectorGeometry:
    """Binned detector plane on side A (particle 1) or B (particle 2)."""

    n_bins: int
    y_range: tuple[float, float]
    side: str = "B"


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """Complete, serializable description of one laboratory run."""

    params: PhysicalParams
    grid: GridSpec
    detector: DetectorGeometry
    measurement: MeasurementSpec | None = None
    evolution_time: float = 0.0
    n_samples: int = 0
    seed: int = 0

    def to_json_dict(self) -> dict:
        doc = {
            "params": {
                "sigma": self.params.sigma,
                "omega0": self.params.omega0,
                "hbar": self.params.hbar,
                "mass": self.params.mass,
            },
            "grid": {
                "n_points": self.grid.n_points,
                "y_min": self.grid.y_min,
                "y_max": self.grid.y_max,
            },
            "detector": {
                "n_bins": self.detector.n_bins,
                "y_range": list(self.detector.y_range),
                "side": self.detector.side,
            },
            "measurement": None,
            "evolution_time": self.evolution_time,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }
        if self.measurement is not None:
            doc["measurement"] = {
                "epsilon": self.measurement.epsilon,
                "center": self.measurement.center,
            }
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ScenarioConfig":
        p = doc["params"]
        g = doc["grid"]
        d = doc["detector"]
        m = doc.get("measurement")
        return cls(
            params=PhysicalParams(
                sigma=float(p["sigma"]),
                omega0=float(p["omega0"]),
                hbar=float(p.get("hbar", 1.0)),
                mass=float(p.get("mass", 1.0)),
            ),
            grid=GridSpec(
                n_points=int(g["n_points"]),
                y_min=float(g["y_min"]),
                y_max=float(g["y_max"]),
            ),
            detector=DetectorGeometry(
                n_bins=int(d["n_bins"]),
                y_range=(float(d["y_range"][0]), float(d["y_range"][1])),
                side=str(d.get("side", "B")),
            ),
            measurement=None if m is None else MeasurementSpec(
                epsilon=float(m["epsilon"]),
                center=float(m.get("center", 0.0)),
            ),
            evolution_time=float(doc.get("evolution_time", 0.0)),
            n_samples=int(doc.get("n_samples", 0)),
            seed=int(doc.get("seed", 0)),
        )


def config_to_json(config: ScenarioConfig) -> str:
    return json.dumps(config.to_json_dict(), indent=2, sort_keys=True)


def config_from_json(text: str) -> ScenarioConfig:
    return ScenarioConfig.from_json_dict(json.loads(text))


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """Outcome of ``validate``: empty violation list means runnable."""

    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def _positive_finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and value > 0


def _length_scales(params: PhysicalParams, measurement: MeasurementSpec | None,
                   evolution_time: float) -> tuple[float, float, float]:
    """(largest spread to contain, conservative feature proxy, true narrowest width).

    The proxy drives the 8-points target; the true widths drive the accuracy
    floor.  Both are needed: the proxy is intentionally pessimistic (ħ/4σ is
    ~2.8x below the actual conditional width ħ/√2σ of the pair amplitude).
    """
    from .analytic import initial_spreads, reduced_spreads
    from .evolution import EvolutionParams, gaussian_width_at

    sigma, omega0, hbar = params.sigma, params.omega0, params.hbar
    dy_init = initial_spreads(params).dy2
    scales = [dy_init]
    proxy = [hbar / (4.0 * sigma), omega0]
    true_widths = [hbar / (2.0 * sigma), 2.0 * omega0]
    ep = EvolutionParams(time=evolution_time, mass=params.mass, hbar=hbar)
    if measurement is not None:
        eps = measurement.epsilon
        red = reduced_spreads(params, eps)
        scales.append(red.dy2)
        if evolution_time > 0:
            scales.append(gaussian_width_at(red.dy2, ep))
        proxy.append(eps)
        true_widths.extend([eps, 1.0 / math.sqrt(2.0 * red.alpha), red.dy2])
    elif evolution_time > 0:
        scales.append(gaussian_width_at(dy_init, ep))
    return max(scales), min(proxy), min(true_widths)


def validate(config: ScenarioConfig) -> ValidationReport:
    """Check a scenario for runnability; report every violation found."""
    v: list[str] = []
    p = config.params
    for name in ("sigma", "omega0", "hbar", "mass"):
        if not _positive_finite(getattr(p, name)):
            v.append(f"{name} must be > 0 and finite")

    g = config.grid
    if not isinstance(g.n_points, int) or g.n_points < MIN_GRID_POINTS:
        v.append(f"n_points must be an integer >= {MIN_GRID_POINTS}")
    elif not _is_pow2(g.n_points):
        v.append("n_points must be a power of two")
    if not (math.isfinite(g.y_min) and math.isfinite(g.y_max) and g.y_max > g.y_min):
        v.append("grid must satisfy y_max > y_min with finite bounds")

    m = config.measurement
    if m is not None:
        if not _positive_finite(m.epsilon):
            v.append("epsilon must be > 0")
        if not math.isfinite(m.center):
            v.append("measurement center must be finite")

    if not (math.isfinite(config.evolution_time) and config.evolution_time >= 0):
        v.append("evolution_time must be >= 0 and finite")
    if not isinstance(config.n_samples, int) or config.n_samples < 0:
        v.append("n_samples must be an integer >= 0")
    if not isinstance(config.seed, int) or not (0 <= config.seed < 2 ** 64):
        v.append("seed must be an integer in [0, 2^64)")

    d = config.detector
    if not isinstance(d.n_bins, int) or d.n_bins < 8:
        v.append("detector n_bins must be an integer >= 8")
    lo, hi = d.y_range
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        v.append("detector y_range must be a finite increasing interval")
    if d.side not in ("A", "B"):
        v.append("detector side must be 'A' or 'B'")

    # Relational checks need sane params and grid bounds.
    params_ok = all(_positive_finite(getattr(p, n)) for n in ("sigma", "omega0", "hbar", "mass"))
    grid_ok = math.isfinite(g.y_min) and math.isfinite(g.y_max) and g.y_max > g.y_min
    meas_ok = m is None or (_positive_finite(m.epsilon) and math.isfinite(m.center))
    time_ok = math.isfinite(config.evolution_time) and config.evolution_time >= 0
    if params_ok and grid_ok and meas_ok and time_ok:
        max_scale, _, _ = _length_scales(p, m, config.evolution_time)
        extent = min(-g.y_min, g.y_max)
        from .analytic import initial_spreads

        dy_init = initial_spreads(p).dy2
        if extent < EXTENT_SIGMAS * dy_init:
            v.append(
                f"grid extent {extent:.6g} < {EXTENT_SIGMAS:g} x initial position "
                f"spread {dy_init:.6g}"
            )
        elif extent < EXTENT_SIGMAS * max_scale:
            v.append(
                f"grid extent {extent:.6g} < {EXTENT_SIGMAS:g} x post-evolution "
                f"width {max_scale:.6g}"
            )
    return ValidationReport(violations=tuple(v))


def auto_grid(params: PhysicalParams, measurement: MeasurementSpec | None = None,
              evolution_time: float = 0.0, *,
              max_points: int = DEFAULT_MAX_POINTS) -> GridSpec:
    """Choose a grid that contains and resolves every state of a scenario.

    Deterministic in its inputs.  Raises ``CapExceededError`` when even
    ``max_points`` cannot hold 1.2 samples per narrowest physical width.
    """
    if max_points < MIN_GRID_POINTS:
        raise ValueError(f"max_points must be >= {MIN_GRID_POINTS}")
    max_scale, proxy_min, true_min = _length_scales(params, measurement, evolution_time)
    center = abs(measurement.center) if measurement is not None else 0.0
    extent = AUTO_EXTENT_SIGMAS * max_scale + center
    span = 2.0 * extent
    target_dy = proxy_min / TARGET_POINTS_PER_SCALE
    n = _next_pow2(max(MIN_GRID_POINTS, math.ceil(span / target_dy) + 1))
    if n > max_points:
        n = _floor_pow2(max_points)
        dy = span / (n - 1)
        dy_cap = true_min / FLOOR_POINTS_PER_WIDTH
        if measurement is not None:
            dy_cap = min(dy_cap, measurement.epsilon / POINTER_MIN_POINTS_PER_WIDTH)
        if dy > dy_cap:
            need = _next_pow2(math.ceil(span / dy_cap) + 1)
            raise CapExceededError(
                f"scale ratio needs >= {need} points for spacing "
                f"{dy_cap:.3g} over span {span:.3g}; cap is {max_points}"
            )
    return GridSpec(n_points=n, y_min=-extent, y_max=extent)
