"""Scenario files: one JSON document describes a full experiment.

Every angular field carries its unit in the key name (``*_deg``) or in an
explicit ``unit`` tag, and is converted to radians here at the boundary; the
rest of the package works in radians, seconds and km only. The energy surplus
coefficient must carry an explicit unit tag because a bare number is
ambiguous.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .game import GameInstance, StrategyInterval
from .measure import TimeGrid
from .optimize import PatternSearchConfig, ScalarMaximizerConfig
from .orbit import (
    ConstellationSpec,
    OrbitConstants,
    TargetSpec,
    build_constellation_game,
)
from .search import SearchConfig


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate; message carries the field path."""


def _get(data: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in data:
        raise ScenarioError(f"{path}.{key}: missing required field")
    return data[key]


def _number(data: Mapping[str, Any], key: str, path: str) -> float:
    value = _get(data, key, path)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def _int(data: Mapping[str, Any], key: str, path: str) -> int:
    value = _get(data, key, path)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully parsed experiment description, SI units and radians throughout."""

    name: str
    constants: OrbitConstants
    constellation: ConstellationSpec
    target: TargetSpec
    grid: TimeGrid
    gamma: float
    strategy_space: StrategyInterval
    theta_max: tuple[float, ...]
    damaged: tuple[int, ...]
    search: SearchConfig
    centralized: PatternSearchConfig
    seed: int

    def __post_init__(self) -> None:
        n = self.constellation.n_satellites
        if len(self.theta_max) != n:
            raise ScenarioError(
                f"game.theta_max: {len(self.theta_max)} values for {n} satellites"
            )
        bad = [k for k in self.damaged if not (1 <= k <= n)]
        if bad:
            raise ScenarioError(f"damaged: indices {bad} outside 1..{n}")

    @property
    def n_satellites(self) -> int:
        return self.constellation.n_satellites

    def build_game(self) -> GameInstance:
        """Wire the orbital coverage game this scenario describes."""
        return build_constellation_game(
            self.constants,
            self.constellation,
            self.target,
            self.grid,
            self.gamma,
            self.strategy_space,
            self.theta_max,
            set(self.damaged),
        )

    def with_satellite_count(self, n: int) -> "ScenarioConfig":
        """Same scenario with ``n`` equally spaced satellites.

        Damaged indices beyond ``n`` are dropped; the energy surplus must be
        uniform so it can be re-broadcast.
        """
        if n < 1:
            raise ScenarioError(f"satellite count must be positive, got {n}")
        if len(set(self.theta_max)) != 1:
            raise ScenarioError(
                "cannot resize a scenario with per-satellite energy surplus"
            )
        constellation = ConstellationSpec.equally_spaced(
            n_satellites=n,
            semi_major_axis=self.constellation.semi_major_axis,
            inclination=self.constellation.inclination,
            raan0=self.constellation.raan0,
            greenwich_angle0=self.constellation.greenwich_angle0,
        )
        return replace(
            self,
            constellation=constellation,
            theta_max=(self.theta_max[0],) * n,
            damaged=tuple(k for k in self.damaged if k <= n),
        )

    def with_theta_max(self, index: int, value: float) -> "ScenarioConfig":
        """Same scenario with agent ``index``'s energy surplus set to ``value``."""
        if not (1 <= index <= self.n_satellites):
            raise ScenarioError(f"agent {index} outside 1..{self.n_satellites}")
        if not (value > 0.0):
            raise ScenarioError(f"theta_max must be positive, got {value}")
        values = list(self.theta_max)
        values[index - 1] = float(value)
        return replace(self, theta_max=tuple(values))

    def with_search_overrides(
        self, epsilon: float | None = None, max_rounds: int | None = None
    ) -> "ScenarioConfig":
        search = SearchConfig(
            epsilon=self.search.epsilon if epsilon is None else epsilon,
            max_rounds=self.search.max_rounds if max_rounds is None else max_rounds,
            scalar=self.search.scalar,
        )
        return replace(self, search=search)


def _parse_theta_max(data: Mapping[str, Any], n: int, path: str) -> tuple[float, ...]:
    if not isinstance(data, Mapping):
        raise ScenarioError(f"{path}: expected an object with 'unit' and a value")
    if "unit" not in data:
        raise ScenarioError(
            f"{path}.unit: missing required field (must be 'radian' or 'degree')"
        )
    unit = data["unit"]
    if unit not in ("radian", "degree"):
        raise ScenarioError(f"{path}.unit: must be 'radian' or 'degree', got {unit!r}")
    scale = 1.0 if unit == "radian" else math.pi / 180.0
    if "value" in data and "values" in data:
        raise ScenarioError(f"{path}: give either 'value' or 'values', not both")
    if "value" in data:
        return (float(data["value"]) * scale,) * n
    if "values" in data:
        values = data["values"]
        if not isinstance(values, list) or len(values) != n:
            raise ScenarioError(f"{path}.values: expected a list of {n} numbers")
        return tuple(float(v) * scale for v in values)
    raise ScenarioError(f"{path}: missing 'value' or 'values'")


def parse_scenario(doc: Mapping[str, Any], name_hint: str = "scenario") -> ScenarioConfig:
    """Validate and convert a parsed JSON document into a ScenarioConfig."""
    deg = math.pi / 180.0

    constants_doc = doc.get("constants", {})
    constants = OrbitConstants(
        mu=float(constants_doc.get("mu_km3_s2", OrbitConstants.mu)),
        j2=float(constants_doc.get("j2", OrbitConstants.j2)),
        earth_radius=float(constants_doc.get("earth_radius_km", OrbitConstants.earth_radius)),
        earth_rotation_rate=float(
            constants_doc.get("earth_rotation_rad_s", OrbitConstants.earth_rotation_rate)
        ),
    )

    con = _get(doc, "constellation", name_hint)
    n = _int(con, "n_satellites", "constellation")
    if n < 1:
        raise ScenarioError("constellation.n_satellites: must be positive")
    if "mean_anomalies_deg" in con:
        anomalies = con["mean_anomalies_deg"]
        if not isinstance(anomalies, list) or len(anomalies) != n:
            raise ScenarioError(
                f"constellation.mean_anomalies_deg: expected {n} values"
            )
        mean_anomalies = tuple(float(v) * deg for v in anomalies)
    else:
        spacing = _number(con, "phase_spacing_deg", "constellation") * deg
        mean_anomalies = tuple(k * spacing for k in range(n))
    constellation = ConstellationSpec(
        semi_major_axis=_number(con, "semi_major_axis_km", "constellation"),
        inclination=_number(con, "inclination_deg", "constellation") * deg,
        raan0=_number(con, "raan_deg", "constellation") * deg,
        greenwich_angle0=_number(con, "greenwich_angle_deg", "constellation") * deg,
        mean_anomalies0=mean_anomalies,
    )
    if constellation.semi_major_axis <= constants.earth_radius:
        raise ScenarioError(
            "constellation.semi_major_axis_km: orbit must be above the Earth's surface"
        )

    tgt = _get(doc, "target", name_hint)
    target = TargetSpec(
        longitude=_number(tgt, "longitude_deg", "target") * deg,
        latitude=_number(tgt, "latitude_deg", "target") * deg,
        view_half_angle=_number(tgt, "view_half_angle_deg", "target") * deg,
    )

    grid_doc = _get(doc, "grid", name_hint)
    grid = TimeGrid(
        t0=0.0,
        tf=_number(grid_doc, "duration_s", "grid"),
        dt=_number(grid_doc, "step_s", "grid"),
    )

    game_doc = _get(doc, "game", name_hint)
    bounds = _get(game_doc, "strategy_bounds_deg", "game")
    if (
        not isinstance(bounds, list)
        or len(bounds) != 2
        or not all(isinstance(b, (int, float)) for b in bounds)
    ):
        raise ScenarioError("game.strategy_bounds_deg: expected [lo, hi] in degrees")
    strategy_space = StrategyInterval(bounds[0] * deg, bounds[1] * deg)
    gamma = _number(game_doc, "gamma", "game")
    theta_max = _parse_theta_max(_get(game_doc, "theta_max", "game"), n, "game.theta_max")

    search_doc = _get(doc, "search", name_hint)
    scalar_doc = search_doc.get("scalar", {})
    scalar = ScalarMaximizerConfig(
        coarse_points=int(scalar_doc.get("coarse_points", 181)),
        refine_tolerance=float(scalar_doc.get("refine_tolerance_deg", 5e-3)) * deg,
        max_refine_iters=int(scalar_doc.get("max_refine_iters", 64)),
    )
    search = SearchConfig(
        epsilon=_number(search_doc, "epsilon_s", "search"),
        max_rounds=_int(search_doc, "max_rounds", "search"),
        scalar=scalar,
    )

    cen = doc.get("centralized", {})
    centralized = PatternSearchConfig(
        initial_step=float(cen.get("initial_step_deg", 3.75)) * deg,
        step_shrink=float(cen.get("step_shrink", 0.5)),
        step_expand=float(cen.get("step_expand", 2.0)),
        min_step=float(cen.get("min_step_deg", 0.01)) * deg,
        max_evals=int(cen.get("max_evals", 20000)),
        poll=str(cen.get("poll", "complete")),
    )

    damaged_doc = doc.get("damaged", [])
    if not isinstance(damaged_doc, list) or not all(
        isinstance(k, int) and not isinstance(k, bool) for k in damaged_doc
    ):
        raise ScenarioError("damaged: expected a list of integer satellite indices")

    return ScenarioConfig(
        name=str(doc.get("name", name_hint)),
        constants=constants,
        constellation=constellation,
        target=target,
        grid=grid,
        gamma=gamma,
        strategy_space=strategy_space,
        theta_max=theta_max,
        damaged=tuple(sorted(damaged_doc)),
        search=search,
        centralized=centralized,
        seed=int(doc.get("seed", 0)),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return parse_scenario(doc, name_hint=path.stem)


def bundled_scenario_path() -> Path:
    """Path of the packaged default scenario (24 equally spaced satellites)."""
    return Path(resources.files("covgame").joinpath("data/baseline_24sat.json"))
