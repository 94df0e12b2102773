"""Experiment harness: method runs, sweeps, bound reporting and CSV output.

Both solution paths report their result through the same ``global_value``
function on a game built from the same scenario, so the values in a
comparison differ only by what the optimizers found. Wall times cover the
optimization loop alone: game construction, coverage precomputation and
certification are excluded, since they are shared setup or diagnostics.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .game import (
    CertificationReport,
    GameInstance,
    StrategyProfile,
    certify_epsilon_equilibrium,
    energy_penalty,
    global_value,
)
from .optimize import pattern_search
from .orbit import drift_rates, orbital_period
from .scenario import ScenarioConfig
from .search import AccessAudit, RoundTrace, SearchResult, iteration_bound, run_search

DISTRIBUTED = "distributed"
CENTRALIZED = "centralized"


@dataclass(frozen=True)
class ComparisonReport:
    """One method's outcome on one scenario."""

    method: str
    value: float                    # final global objective, seconds
    wall_time: float                # optimization loop only, seconds
    iterations: int                 # rounds (distributed) or evaluations (centralized)
    certified: bool
    final_theta: tuple[float, ...]  # radians, one entry per satellite
    converged_at: int | None = None


@dataclass(frozen=True)
class EnergySweepPoint:
    """One point of the energy-surplus sweep."""

    theta_max: float
    abs_theta_agent: float
    abs_theta_neighbor: float


def scan_resolution_for(cfg: ScenarioConfig) -> float:
    """Certification scan resolution matching the engine's own scan grid."""
    return cfg.strategy_space.width / (cfg.search.scalar.coarse_points - 1)


def assumption_envelopes(cfg: ScenarioConfig) -> tuple[float, float]:
    """Loose but certainly valid global-objective bounds for this scenario.

    Upper: the whole horizon covered at zero penalty. Lower: nothing covered
    and every active agent paying the worst-case penalty of its interval.
    """
    phi_max = cfg.grid.duration
    worst = max(abs(cfg.strategy_space.lo), abs(cfg.strategy_space.hi))
    phi_min = -cfg.gamma * sum(
        (worst / cfg.theta_max[k - 1]) ** 2
        for k in range(1, cfg.n_satellites + 1)
        if k not in cfg.damaged
    )
    return phi_min, phi_max


def round_bound(cfg: ScenarioConfig) -> int:
    """Guaranteed-convergence round count from the scenario envelopes."""
    phi_min, phi_max = assumption_envelopes(cfg)
    return iteration_bound(phi_min, phi_max, cfg.search.epsilon)


def run_distributed(
    cfg: ScenarioConfig,
    game: GameInstance | None = None,
    audit: AccessAudit | None = None,
) -> tuple[ComparisonReport, SearchResult]:
    """Build the game, run the round engine, certify, report.

    The reported wall time is the sum of per-round times, which excludes the
    final certification scan.
    """
    game = cfg.build_game() if game is None else game
    initial = StrategyProfile.zeros(game.n_agents)
    result = run_search(game, initial, cfg.search, audit=audit)
    wall = sum(t.wall_time for t in result.traces)
    report = ComparisonReport(
        method=DISTRIBUTED,
        value=global_value(game, result.final_profile),
        wall_time=wall,
        iterations=len(result.traces),
        certified=result.certified,
        final_theta=tuple(float(v) for v in result.final_profile.theta),
        converged_at=result.converged_at,
    )
    return report, result


def run_centralized(
    cfg: ScenarioConfig, game: GameInstance | None = None
) -> tuple[ComparisonReport, CertificationReport]:
    """Pattern-search the full active-strategy box from the zero profile."""
    game = cfg.build_game() if game is None else game
    active = game.active_indices
    bounds = [
        (game.agent(k).strategy_space.lo, game.agent(k).strategy_space.hi)
        for k in active
    ]

    def objective(x: np.ndarray) -> float:
        profile = StrategyProfile.from_mapping(
            game.n_agents, dict(zip(active, x.tolist()))
        )
        return global_value(game, profile)

    start = np.zeros(len(active))
    t_start = time.perf_counter()
    if active:
        x_star, _, evals = pattern_search(objective, bounds, start, cfg.centralized)
    else:
        x_star, evals = start, 0
    wall = time.perf_counter() - t_start

    final = StrategyProfile.from_mapping(
        game.n_agents, dict(zip(active, x_star.tolist()))
    )
    certification = certify_epsilon_equilibrium(
        game,
        final,
        cfg.search.epsilon,
        scan_resolution_for(cfg),
        refine=cfg.search.scalar,
    )
    report = ComparisonReport(
        method=CENTRALIZED,
        value=global_value(game, final),
        wall_time=wall,
        iterations=evals,
        certified=certification.certified,
        final_theta=tuple(float(v) for v in final.theta),
    )
    return report, certification


def sweep_satellite_count(
    cfg: ScenarioConfig, counts: Sequence[int]
) -> list[tuple[int, ComparisonReport]]:
    """Run both methods for each constellation size; rows are (N, report)."""
    rows: list[tuple[int, ComparisonReport]] = []
    for n in counts:
        point = cfg.with_satellite_count(n)
        distributed, _ = run_distributed(point)
        centralized, _ = run_centralized(point)
        rows.append((n, distributed))
        rows.append((n, centralized))
    return rows


def sweep_energy_coefficient(
    cfg: ScenarioConfig, agent: int, values: Sequence[float]
) -> list[EnergySweepPoint]:
    """Distributed runs varying one agent's energy surplus coefficient.

    Reports the final strategy magnitude of the varied agent and of its
    next-indexed ring neighbor.
    """
    if not (1 <= agent <= cfg.n_satellites):
        raise ValueError(f"agent {agent} outside 1..{cfg.n_satellites}")
    neighbor = agent + 1 if agent < cfg.n_satellites else 1
    points: list[EnergySweepPoint] = []
    for value in values:
        point_cfg = cfg.with_theta_max(agent, value)
        report, _ = run_distributed(point_cfg)
        points.append(
            EnergySweepPoint(
                theta_max=float(value),
                abs_theta_agent=abs(report.final_theta[agent - 1]),
                abs_theta_neighbor=abs(report.final_theta[neighbor - 1]),
            )
        )
    return points


def phase_linearity_residual(
    final_theta: Sequence[float], mean_anomalies0: Sequence[float], active: Sequence[int]
) -> float:
    """RMS residual (radians) of the active final phases against a linear fit.

    Diagnostic for how evenly the ring redistributed itself; reported, never
    thresholded.
    """
    phases = np.array(
        [mean_anomalies0[k - 1] + final_theta[k - 1] for k in active]
    )
    order = np.arange(len(phases), dtype=float)
    if len(phases) < 2:
        return 0.0
    coeffs = np.polyfit(order, np.unwrap(phases), 1)
    fit = np.polyval(coeffs, order)
    return float(np.sqrt(np.mean((np.unwrap(phases) - fit) ** 2)))


def emit_results(
    out_dir: str | Path,
    cfg: ScenarioConfig,
    reports: Sequence[ComparisonReport],
    traces: Sequence[RoundTrace] = (),
    extra_summary: dict | None = None,
) -> dict[str, Path]:
    """Write comparison, trace, profile CSVs and a machine-readable summary.

    File contents are deterministic for deterministic runs except for the
    wall-time columns.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    comparison = out / "comparison.csv"
    with comparison.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "value_s", "time_s", "iters", "certified"])
        for r in reports:
            writer.writerow(
                [r.method, f"{r.value:.6f}", f"{r.wall_time:.6f}", r.iterations, int(r.certified)]
            )
    written["comparison"] = comparison

    trace_path = out / "trace.csv"
    with trace_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "phi_s", "n_innovators", "max_regret_s", "wall_time_s"])
        for t in traces:
            writer.writerow(
                [
                    t.iteration,
                    f"{t.phi:.6f}",
                    len(t.innovators),
                    f"{t.max_regret:.6f}",
                    f"{t.wall_time:.6f}",
                ]
            )
    written["trace"] = trace_path

    for r in reports:
        name = "profile.csv" if r.method == DISTRIBUTED else f"profile_{r.method}.csv"
        profile_path = out / name
        with profile_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["agent", "theta_deg", "energy_penalty"])
            game_agents = cfg.n_satellites
            for k in range(1, game_agents + 1):
                theta = r.final_theta[k - 1]
                penalty = (theta / cfg.theta_max[k - 1]) ** 2 if k not in cfg.damaged else 0.0
                writer.writerow([k, f"{np.degrees(theta):.9f}", f"{penalty:.9f}"])
        written[f"profile_{r.method}"] = profile_path

    phi_min, phi_max = assumption_envelopes(cfg)
    summary = {
        "scenario": cfg.name,
        "n_satellites": cfg.n_satellites,
        "damaged": list(cfg.damaged),
        "epsilon_s": cfg.search.epsilon,
        "max_rounds": cfg.search.max_rounds,
        "gamma": cfg.gamma,
        "grid": {"duration_s": cfg.grid.duration, "step_s": cfg.grid.dt},
        "constants": asdict(cfg.constants),
        "orbit": {
            "semi_major_axis_km": cfg.constellation.semi_major_axis,
            "inclination_deg": float(np.degrees(cfg.constellation.inclination)),
            "period_s": orbital_period(cfg.constants, cfg.constellation),
            "node_rate_rad_s": drift_rates(cfg.constants, cfg.constellation).node_rate,
            "phase_rate_rad_s": drift_rates(cfg.constants, cfg.constellation).phase_rate,
        },
        "bound": {
            "phi_min_s": phi_min,
            "phi_max_s": phi_max,
            "rounds": round_bound(cfg),
        },
        "methods": {},
    }
    active = [k for k in range(1, cfg.n_satellites + 1) if k not in cfg.damaged]
    for r in reports:
        summary["methods"][r.method] = {
            "value_s": r.value,
            "wall_time_s": r.wall_time,
            "iterations": r.iterations,
            "certified": r.certified,
            "converged_at": r.converged_at,
            "phase_linearity_residual_rad": phase_linearity_residual(
                r.final_theta, cfg.constellation.mean_anomalies0, active
            ),
        }
    if extra_summary:
        summary.update(extra_summary)
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written["summary"] = summary_path
    return written


def write_sweep_counts_csv(
    out_dir: str | Path, rows: Sequence[tuple[int, ComparisonReport]]
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep_counts.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "method", "value_s", "time_s", "iters", "certified"])
        for n, r in rows:
            writer.writerow(
                [n, r.method, f"{r.value:.6f}", f"{r.wall_time:.6f}", r.iterations, int(r.certified)]
            )
    return path


def write_sweep_energy_csv(
    out_dir: str | Path, points: Sequence[EnergySweepPoint]
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep_energy.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_max", "abs_theta_k", "abs_theta_neighbor"])
        for p in points:
            writer.writerow(
                [f"{p.theta_max:.9f}", f"{p.abs_theta_agent:.9f}", f"{p.abs_theta_neighbor:.9f}"]
            )
    return path
