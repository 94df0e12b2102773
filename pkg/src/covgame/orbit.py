"""Circular low-Earth-orbit constellation model with secular oblateness drift.

Satellites share one circular orbit; the dominant oblateness (J2) effect makes
the ascending node and each satellite's orbital phase drift linearly in time.
A satellite's strategy is a one-time phase offset added to its initial mean
anomaly. Ground-target visibility is a pure geocentric-angle threshold between
the satellite and target position vectors in the Earth-fixed frame, sampled at
the left edge of every grid cell, which makes each satellite's coverage a
union of short time windows.

Frames follow the usual chain: orbital plane -> inertial via node and
inclination rotations, inertial -> Earth-fixed via the sidereal angle. The
rotation matrices are active (counterclockwise) rotations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .game import AgentSpec, GameInstance, StrategyInterval, neighbor_graph_from_reach
from .measure import CoverageSet, TimeGrid

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OrbitConstants:
    """Physical constants; defaults are the standard WGS-84/EGM values."""

    mu: float = 398600.4418        # geocentric gravitational constant, km^3/s^2
    j2: float = 1.08262668e-3      # second zonal harmonic, dimensionless
    earth_radius: float = 6378.137  # equatorial radius, km
    earth_rotation_rate: float = 7.2921159e-5  # rad/s

    def __post_init__(self) -> None:
        for name in ("mu", "earth_radius", "earth_rotation_rate"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be positive")
        if self.j2 < 0.0:
            raise ValueError("j2 must be non-negative")


@dataclass(frozen=True)
class ConstellationSpec:
    """Shared circular-orbit elements plus per-satellite initial phases.

    Angles in radians, lengths in km. The orbit is circular: eccentricity and
    argument of perigee are pinned to zero and the geocentric distance is the
    semi-major axis.
    """

    semi_major_axis: float
    inclination: float
    raan0: float                      # ascending-node angle at t0
    greenwich_angle0: float           # sidereal hour angle at t0
    mean_anomalies0: tuple[float, ...]  # initial phase of each satellite
    eccentricity: float = 0.0
    arg_perigee: float = 0.0

    def __post_init__(self) -> None:
        if self.eccentricity != 0.0 or self.arg_perigee != 0.0:
            raise ValueError("only circular orbits are modeled (e = omega = 0)")
        if not self.mean_anomalies0:
            raise ValueError("constellation needs at least one satellite")

    @classmethod
    def equally_spaced(
        cls,
        n_satellites: int,
        semi_major_axis: float,
        inclination: float,
        raan0: float,
        greenwich_angle0: float,
        spacing: float | None = None,
    ) -> "ConstellationSpec":
        """Ring of ``n_satellites`` with phase ``(k-1)*spacing`` for satellite k."""
        if n_satellites < 1:
            raise ValueError("need at least one satellite")
        if spacing is None:
            spacing = TWO_PI / n_satellites
        return cls(
            semi_major_axis=semi_major_axis,
            inclination=inclination,
            raan0=raan0,
            greenwich_angle0=greenwich_angle0,
            mean_anomalies0=tuple(k * spacing for k in range(n_satellites)),
        )

    @property
    def n_satellites(self) -> int:
        return len(self.mean_anomalies0)


@dataclass(frozen=True)
class TargetSpec:
    """Ground target on a spherical Earth plus the visibility half-angle.

    ``view_half_angle`` is the largest geocentric angle between satellite and
    target at which the target is observable. Values up to pi are accepted so
    degenerate always-visible setups stay expressible.
    """

    longitude: float
    latitude: float
    view_half_angle: float

    def __post_init__(self) -> None:
        if not (abs(self.latitude) <= math.pi / 2.0):
            raise ValueError("latitude must lie in [-pi/2, pi/2]")
        if not (0.0 < self.view_half_angle <= math.pi):
            raise ValueError("view_half_angle must lie in (0, pi]")


@dataclass(frozen=True)
class DriftRates:
    """Secular angular rates: node drift and phase rate, rad/s."""

    node_rate: float
    phase_rate: float


def rot_x(angle: float) -> np.ndarray:
    """Active rotation by ``angle`` radians about the x axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    """Active rotation by ``angle`` radians about the y axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    """Active rotation by ``angle`` radians about the z axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def drift_rates(constants: OrbitConstants, spec: ConstellationSpec) -> DriftRates:
    """Secular node and phase rates for the shared orbit.

    With mean motion ``n = sqrt(mu / a^3)`` and the oblateness coefficient
    ``c = 1.5 n j2 (Re/a)^2 / (1-e^2)^2``, the node drifts at ``-c cos(i)``
    and the phase advances at ``n - c sqrt(1-e^2) (1.5 sin(i)^2 - 1)``.
    """
    a = spec.semi_major_axis
    e = spec.eccentricity
    n_m = math.sqrt(constants.mu / a**3)
    c_j2 = 1.5 * n_m * constants.j2 / (1.0 - e * e) ** 2 * (constants.earth_radius / a) ** 2
    node_rate = -c_j2 * math.cos(spec.inclination)
    phase_rate = n_m - c_j2 * math.sqrt(1.0 - e * e) * (
        1.5 * math.sin(spec.inclination) ** 2 - 1.0
    )
    return DriftRates(node_rate=node_rate, phase_rate=phase_rate)


def mean_motion(constants: OrbitConstants, spec: ConstellationSpec) -> float:
    return math.sqrt(constants.mu / spec.semi_major_axis**3)


def orbital_period(constants: OrbitConstants, spec: ConstellationSpec) -> float:
    """Unperturbed orbital period, seconds."""
    return TWO_PI / mean_motion(constants, spec)


def mean_anomaly(
    spec: ConstellationSpec, rates: DriftRates, k: int, theta: float, elapsed: float
) -> float:
    """Phase of satellite ``k`` (1-based) after ``elapsed`` seconds.

    The strategy ``theta`` is a one-time offset on the initial phase.
    """
    return spec.mean_anomalies0[k - 1] + theta + rates.phase_rate * elapsed


def satellite_position_ecf(
    constants: OrbitConstants,
    spec: ConstellationSpec,
    rates: DriftRates,
    k: int,
    theta: float,
    t: float,
    t0: float = 0.0,
) -> np.ndarray:
    """Earth-fixed position (km) of satellite ``k`` at time ``t``.

    The in-plane position at the current phase is rotated into the inertial
    frame through the argument of perigee, inclination and the drifted node,
    then into the Earth-fixed frame through the sidereal angle.
    """
    elapsed = t - t0
    m_k = mean_anomaly(spec, rates, k, theta, elapsed)
    r_k = spec.semi_major_axis  # circular orbit
    in_plane = np.array([r_k * math.cos(m_k), r_k * math.sin(m_k), 0.0])
    raan = spec.raan0 + rates.node_rate * elapsed
    eci = rot_z(-raan) @ rot_x(-spec.inclination) @ rot_z(-spec.arg_perigee) @ in_plane
    sidereal = spec.greenwich_angle0 + constants.earth_rotation_rate * elapsed
    return rot_z(-sidereal) @ eci


def target_position_ecf(constants: OrbitConstants, target: TargetSpec) -> np.ndarray:
    """Earth-fixed position (km) of the target on a spherical Earth."""
    clat = math.cos(target.latitude)
    return constants.earth_radius * np.array(
        [
            clat * math.cos(target.longitude),
            clat * math.sin(target.longitude),
            math.sin(target.latitude),
        ]
    )


def geocentric_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle at the Earth's center between two position vectors, radians."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("geocentric angle of a zero vector is undefined")
    c = float(np.dot(u, v)) / (nu * nv)
    return math.acos(min(1.0, max(-1.0, c)))


def _wrap_pi(x: np.ndarray) -> np.ndarray:
    """Wrap angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - x, TWO_PI)


class ConstellationCoverage:
    """Per-satellite target-visibility masks over a shared time grid.

    Visibility of satellite ``k`` at phase ``M`` reduces, after pulling the
    target direction back through the time-dependent frame rotations, to
    ``amp(t) * cos(M - psi(t)) >= cos(view_half_angle)``: at each time the
    visible phases form one arc. Re-expressed in the strategy variable, every
    grid cell ``j`` is covered exactly for the offsets in
    ``[lo_j, hi_j]`` (plus its ``2 pi`` aliases), where the interval bounds
    are precomputed once per grid. A single mask then costs two comparisons
    per cell, a whole best-response scan over a sorted strategy grid costs
    one ``searchsorted`` pass, and the reachable-coverage mask over a full
    strategy interval (used to freeze the neighbor graph) is an exact
    interval-intersection test. All three paths share the same float
    comparisons, so they can never disagree on a boundary cell.
    """

    def __init__(
        self,
        constants: OrbitConstants,
        spec: ConstellationSpec,
        target: TargetSpec,
        grid: TimeGrid,
    ) -> None:
        self.constants = constants
        self.spec = spec
        self.target = target
        self.grid = grid
        self.rates = drift_rates(constants, spec)

        elapsed = grid.cell_starts() - grid.t0
        unit_target = target_position_ecf(constants, target) / constants.earth_radius
        # Pull the target back through the inverse frame chain: the composite
        # z-rotation (node + sidereal) followed by the inclination tilt.
        alpha = (
            spec.raan0
            + self.rates.node_rate * elapsed
            + spec.greenwich_angle0
            + constants.earth_rotation_rate * elapsed
        )
        ca, sa = np.cos(alpha), np.sin(alpha)
        w1 = ca * unit_target[0] - sa * unit_target[1]
        w2 = sa * unit_target[0] + ca * unit_target[1]
        w3 = np.full_like(w1, unit_target[2])
        ci, si = math.cos(spec.inclination), math.sin(spec.inclination)
        v1 = w1
        v2 = ci * w2 - si * w3

        amp = np.hypot(v1, v2)
        psi = np.arctan2(v2, v1)
        cos_bar = math.cos(target.view_half_angle)
        # Half-width of the visible phase arc at each time; negative when the
        # target is out of reach of the whole orbit at that time. A threshold
        # angle of 90 degrees or more keeps even the projection-degenerate
        # geometry (amp == 0) visible.
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(amp > 0.0, cos_bar / amp, math.inf)
        half_width = np.where(ratio > 1.0, -1.0, np.arccos(np.clip(ratio, -1.0, 1.0)))
        if cos_bar <= 0.0:
            half_width = np.where(amp == 0.0, np.pi, half_width)
        self._visible = half_width >= 0.0

        # Strategy interval covering each cell, per satellite: a cell is
        # covered iff wrap(theta) lands in [lo, hi] or one of the 2 pi
        # aliases of that interval.
        n_sats = spec.n_satellites
        self._theta_lo = np.empty((n_sats, grid.n_steps))
        self._theta_hi = np.empty((n_sats, grid.n_steps))
        for i, m0 in enumerate(spec.mean_anomalies0):
            base = _wrap_pi(m0 + self.rates.phase_rate * elapsed - psi)
            self._theta_lo[i] = -base - half_width
            self._theta_hi[i] = -base + half_width

    def _mask(self, k: int, theta: float) -> np.ndarray:
        if not (-math.pi < theta <= math.pi):
            # Keep in-range strategies bit-identical to the batch comparisons;
            # wrapping would perturb them by an ulp.
            theta = float(_wrap_pi(theta))
        lo = self._theta_lo[k - 1]
        hi = self._theta_hi[k - 1]
        inside = (lo <= theta) & (theta <= hi)
        inside |= theta >= lo + TWO_PI
        inside |= theta <= hi - TWO_PI
        return inside & self._visible

    def __call__(self, k: int, theta: float) -> CoverageSet:
        """Coverage of satellite ``k`` (1-based) playing phase offset ``theta``."""
        return CoverageSet(self.grid, self._mask(k, theta))

    def mask_matrix(self, k: int, thetas: np.ndarray) -> np.ndarray:
        """Stacked coverage masks of satellite ``k`` for many strategies."""
        thetas = np.asarray(thetas, dtype=float)
        return np.stack([self._mask(k, t) for t in thetas])

    def masked_cell_counts(
        self, k: int, thetas: np.ndarray, within: np.ndarray
    ) -> np.ndarray:
        """Covered-cell counts restricted to ``within``, for many strategies.

        Counts ``|coverage(k, theta) & within|`` for every entry of a sorted
        ``thetas`` array in one pass over the grid cells: each relevant cell
        contributes its strategy interval (and aliases) to a difference
        array indexed by ``searchsorted``, whose comparisons agree exactly
        with the per-mask path. Requires ``thetas`` sorted ascending within
        ``(-pi, pi]``.
        """
        thetas = np.asarray(thetas, dtype=float)
        if thetas.size == 0:
            return np.zeros(0, dtype=int)
        if np.any(np.diff(thetas) < 0.0) or thetas[0] <= -math.pi or thetas[-1] > math.pi:
            return np.array(
                [int(np.count_nonzero(self._mask(k, t) & within)) for t in thetas]
            )
        select = within & self._visible
        lo = self._theta_lo[k - 1][select]
        hi = self._theta_hi[k - 1][select]
        m = thetas.size
        diff = np.zeros(m + 1, dtype=np.int64)

        def add(starts: np.ndarray, stops: np.ndarray, sign: int) -> None:
            # Interval [start, stop] in theta; searchsorted reproduces the
            # exact (theta >= start) & (theta <= stop) comparisons.
            i0 = np.searchsorted(thetas, starts, side="left")
            i1 = np.searchsorted(thetas, stops, side="right")
            keep = i0 < i1
            np.add.at(diff, i0[keep], sign)
            np.add.at(diff, i1[keep], -sign)

        add(lo, hi, 1)
        add(lo + TWO_PI, np.full_like(lo, math.inf), 1)
        add(np.full_like(hi, -math.inf), hi - TWO_PI, 1)
        # Inclusion-exclusion for the (degenerate, half_width == pi) case in
        # which an alias overlaps the main interval.
        add(lo + TWO_PI, hi, -1)
        add(lo, hi - TWO_PI, -1)
        return np.cumsum(diff[:-1])

    def reachable_mask(self, k: int, interval: StrategyInterval) -> np.ndarray:
        """Cells satellite ``k`` can cover for some strategy in ``interval``.

        Exact over the whole continuum of strategies: cell ``j`` is reachable
        iff its covering interval (or an alias) meets ``interval``. Covers
        every per-strategy mask by construction. Requires the interval to lie
        within ``[-pi, pi]``.
        """
        if interval.lo < -math.pi or interval.hi > math.pi:
            raise ValueError("strategy interval must lie within [-pi, pi]")
        lo = self._theta_lo[k - 1]
        hi = self._theta_hi[k - 1]
        meets = (lo <= interval.hi) & (hi >= interval.lo)
        meets |= lo + TWO_PI <= interval.hi
        meets |= hi - TWO_PI >= interval.lo
        return meets & self._visible


def coverage_set(
    constants: OrbitConstants,
    spec: ConstellationSpec,
    target: TargetSpec,
    grid: TimeGrid,
    k: int,
    theta: float,
) -> CoverageSet:
    """Visibility windows of satellite ``k`` for the target over the grid.

    A cell is covered iff the geocentric angle between satellite and target at
    the cell's left edge is at most the target's view half-angle.
    """
    return ConstellationCoverage(constants, spec, target, grid)(k, theta)


def build_constellation_game(
    constants: OrbitConstants,
    spec: ConstellationSpec,
    target: TargetSpec,
    grid: TimeGrid,
    gamma: float,
    strategy_space: StrategyInterval,
    theta_max: float | tuple[float, ...],
    damaged: frozenset[int] | set[int] = frozenset(),
) -> GameInstance:
    """Wire the orbital model into a coverage game.

    Damaged satellites (1-based indices) become inactive agents: no coverage,
    no penalty, no strategy dimension. The neighbor graph is frozen from the
    exact reachable-coverage overlap, so any two satellites whose windows can
    ever intersect within their strategy intervals are linked for the whole
    run; the global objective then moves by exactly each unilateral
    local-objective change.
    """
    n = spec.n_satellites
    if isinstance(theta_max, (int, float)):
        theta_max_values = (float(theta_max),) * n
    else:
        theta_max_values = tuple(float(v) for v in theta_max)
    if len(theta_max_values) != n:
        raise ValueError(
            f"got {len(theta_max_values)} theta_max values for {n} satellites"
        )
    bad = [k for k in damaged if not (1 <= k <= n)]
    if bad:
        raise ValueError(f"damaged indices {bad} outside 1..{n}")

    agents = tuple(
        AgentSpec(
            index=k,
            strategy_space=strategy_space,
            theta_max=theta_max_values[k - 1],
            active=k not in damaged,
        )
        for k in range(1, n + 1)
    )
    coverage = ConstellationCoverage(constants, spec, target, grid)
    reach = {
        a.index: coverage.reachable_mask(a.index, a.strategy_space)
        for a in agents
        if a.active
    }
    graph: dict[int, set[int]] = {k: set() for k in reach}
    indices = sorted(reach)
    for i, k in enumerate(indices):
        for l in indices[i + 1 :]:
            if bool(np.any(reach[k] & reach[l])):
                graph[k].add(l)
                graph[l].add(k)
    return GameInstance(
        agents=agents,
        grid=grid,
        coverage_fn=coverage,
        gamma=gamma,
        neighbor_graph={k: frozenset(v) for k, v in graph.items()},
    )
