"""Coverage game objects: strategy spaces, objectives, neighbor graph, regret.

The game couples a per-agent coverage generator (a pure map from an agent's
scalar strategy to a :class:`~covgame.measure.CoverageSet`) with a quadratic
energy penalty. The global objective is the measure of the union of all active
agents' coverage minus the scaled penalty sum; each agent's local objective is
the measure of its coverage exclusive of its graph neighbors minus its own
penalty. With a neighbor graph that contains every pair whose coverages can
ever overlap, a unilateral strategy change moves both objectives by exactly
the same amount, which is what the distributed search engine relies on.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .measure import CoverageSet, TimeGrid, difference, union_many
from .optimize import ScalarMaximizerConfig, maximize_scalar

CoverageFn = Callable[[int, float], CoverageSet]


@dataclass(frozen=True)
class StrategyInterval:
    """Closed interval of admissible strategies, radians."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("strategy interval must be finite")
        if self.lo > self.hi:
            raise ValueError(f"strategy interval [{self.lo}, {self.hi}] is empty")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, theta: float, tol: float = 1e-12) -> bool:
        return self.lo - tol <= theta <= self.hi + tol

    def clamp(self, theta: float) -> float:
        return min(max(theta, self.lo), self.hi)

    def sample(self, n: int) -> np.ndarray:
        """Uniform n-point sample including both endpoints."""
        return np.linspace(self.lo, self.hi, max(n, 2))


@dataclass(frozen=True)
class AgentSpec:
    """One agent: 1-based index, strategy interval, energy surplus, liveness.

    ``theta_max`` is the energy surplus coefficient: the penalty for playing
    ``theta`` is ``(theta / theta_max) ** 2``, so a larger surplus makes
    maneuvers cheaper. Inactive agents model damaged hardware: they contribute
    no coverage, no energy and take no part in the game.
    """

    index: int
    strategy_space: StrategyInterval
    theta_max: float
    active: bool = True

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("agent index is 1-based")
        if not (self.theta_max > 0.0):
            raise ValueError(f"theta_max must be positive, got {self.theta_max}")


@dataclass(frozen=True)
class StrategyProfile:
    """Vector of strategies, one entry per agent, position = index - 1.

    Entries of inactive agents are kept at 0 and ignored by every objective.
    """

    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float).copy()
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @classmethod
    def zeros(cls, n_agents: int) -> "StrategyProfile":
        return cls(np.zeros(n_agents))

    @classmethod
    def from_mapping(cls, n_agents: int, values: Mapping[int, float]) -> "StrategyProfile":
        theta = np.zeros(n_agents)
        for index, value in values.items():
            theta[index - 1] = value
        return cls(theta)

    def for_agent(self, index: int) -> float:
        return float(self.theta[index - 1])

    def replace(self, index: int, value: float) -> "StrategyProfile":
        theta = self.theta.copy()
        theta[index - 1] = value
        return StrategyProfile(theta)

    def __len__(self) -> int:
        return self.theta.size


class GameInstance:
    """Immutable bundle of agents, coverage generator, penalty scale and graph.

    ``coverage_fn(k, theta)`` must be pure; results are memoized behind an
    internal lock so concurrent readers see consistent values. The neighbor
    graph maps each active agent index to the set of active agents whose
    coverage can overlap its own; it must be symmetric and irreflexive.
    """

    def __init__(
        self,
        agents: Sequence[AgentSpec],
        grid: TimeGrid,
        coverage_fn: CoverageFn,
        gamma: float,
        neighbor_graph: Mapping[int, Iterable[int]],
    ) -> None:
        self.agents = tuple(agents)
        self.grid = grid
        self.coverage_fn = coverage_fn
        self.gamma = float(gamma)
        indices = [a.index for a in self.agents]
        if indices != list(range(1, len(self.agents) + 1)):
            raise ValueError("agent indices must be contiguous and 1-based")
        active = {a.index for a in self.agents if a.active}
        graph = {k: frozenset(neighbor_graph.get(k, ())) for k in sorted(active)}
        for k, neigh in graph.items():
            if k in neigh:
                raise ValueError(f"agent {k} cannot neighbor itself")
            for l in neigh:
                if l not in active:
                    raise ValueError(f"neighbor {l} of agent {k} is not active")
                if k not in graph[l]:
                    raise ValueError(f"neighbor graph is not symmetric at ({k},{l})")
        self.neighbor_graph: dict[int, frozenset[int]] = graph
        self._coverage_cache: dict[tuple[int, float], CoverageSet] = {}
        self._cache_lock = threading.Lock()

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def active_indices(self) -> tuple[int, ...]:
        return tuple(a.index for a in self.agents if a.active)

    def agent(self, index: int) -> AgentSpec:
        return self.agents[index - 1]

    def neighbors(self, index: int) -> frozenset[int]:
        return self.neighbor_graph[index]

    def coverage(self, index: int, theta: float) -> CoverageSet:
        """Memoized coverage for agent ``index`` playing ``theta``."""
        key = (index, float(theta))
        with self._cache_lock:
            hit = self._coverage_cache.get(key)
        if hit is not None:
            return hit
        result = self.coverage_fn(index, float(theta))
        if result.grid != self.grid:
            raise ValueError(f"coverage_fn returned a set on a foreign grid for agent {index}")
        with self._cache_lock:
            self._coverage_cache.setdefault(key, result)
        return result

    def validate_profile(self, profile: StrategyProfile) -> None:
        if len(profile) != self.n_agents:
            raise ValueError(
                f"profile has {len(profile)} entries for {self.n_agents} agents"
            )
        for a in self.agents:
            if a.active and not a.strategy_space.contains(profile.for_agent(a.index)):
                raise ValueError(
                    f"strategy {profile.for_agent(a.index)} of agent {a.index} "
                    f"is outside [{a.strategy_space.lo}, {a.strategy_space.hi}]"
                )


def energy_penalty(agent: AgentSpec, theta: float) -> float:
    """Quadratic maneuver cost ``(theta / theta_max) ** 2``, dimensionless."""
    ratio = theta / agent.theta_max
    return ratio * ratio


def global_value(game: GameInstance, profile: StrategyProfile) -> float:
    """Union coverage of all active agents minus the scaled penalty sum, seconds."""
    sets = [game.coverage(k, profile.for_agent(k)) for k in game.active_indices]
    covered = union_many(sets, grid=game.grid).measure
    penalty = sum(
        energy_penalty(game.agent(k), profile.for_agent(k))
        for k in game.active_indices
    )
    return covered - game.gamma * penalty


def local_value_view(
    game: GameInstance,
    index: int,
    theta: float,
    neighbor_thetas: Mapping[int, float],
) -> float:
    """Local objective of one agent from its own strategy and its neighbors'.

    This is the information-restricted entry point: it reads nothing beyond
    ``theta`` and the supplied neighbor strategies. ``neighbor_thetas`` must
    provide a value for every graph neighbor of ``index``.
    """
    own = game.coverage(index, theta)
    neighbor_sets = [
        game.coverage(l, neighbor_thetas[l]) for l in sorted(game.neighbors(index))
    ]
    exclusive = difference(own, union_many(neighbor_sets, grid=game.grid))
    return exclusive.measure - game.gamma * energy_penalty(game.agent(index), theta)


def local_value(game: GameInstance, index: int, profile: StrategyProfile) -> float:
    """Local objective of agent ``index`` under ``profile``.

    Only the strategies of ``index`` and its graph neighbors are read.
    """
    if not game.agent(index).active:
        raise ValueError(f"agent {index} is not active")
    view = {l: profile.for_agent(l) for l in game.neighbors(index)}
    return local_value_view(game, index, profile.for_agent(index), view)


def regret(
    game: GameInstance, index: int, theta_new: float, profile: StrategyProfile
) -> float:
    """Local-objective change if ``index`` unilaterally switches to ``theta_new``."""
    view = {l: profile.for_agent(l) for l in game.neighbors(index)}
    before = local_value_view(game, index, profile.for_agent(index), view)
    after = local_value_view(game, index, theta_new, view)
    return after - before


def best_response_objective(
    game: GameInstance, index: int, neighbor_thetas: Mapping[int, float]
) -> tuple[Callable[[float], float], Callable[[np.ndarray], np.ndarray] | None]:
    """Scalar and optional vectorized local objective with neighbors frozen.

    The neighbor union is fixed while one agent scans its own strategy, so it
    is folded once; each probe then costs one coverage mask and one masked
    count. When the coverage generator exposes ``mask_matrix`` (as the orbital
    one does), a batch evaluator over a whole strategy grid is returned too.
    """
    agent = game.agent(index)
    neighbor_sets = [
        game.coverage(l, neighbor_thetas[l]) for l in sorted(game.neighbors(index))
    ]
    uncovered = ~union_many(neighbor_sets, grid=game.grid).mask
    dt = game.grid.dt
    gamma = game.gamma

    def f(theta: float) -> float:
        own = game.coverage(index, theta).mask
        gain = dt * float(np.count_nonzero(own & uncovered))
        return gain - gamma * energy_penalty(agent, theta)

    batch = None
    cell_counts = getattr(game.coverage_fn, "masked_cell_counts", None)
    if cell_counts is not None:
        def batch(thetas: np.ndarray) -> np.ndarray:
            thetas = np.asarray(thetas, dtype=float)
            gains = dt * cell_counts(index, thetas, uncovered)
            return gains - gamma * (thetas / agent.theta_max) ** 2

    return f, batch


def neighbor_graph_from_reach(
    agents: Sequence[AgentSpec],
    coverage_fn: CoverageFn,
    grid: TimeGrid,
    samples: int = 64,
) -> dict[int, frozenset[int]]:
    """Frozen neighbor graph from strategy-reachable coverage overlap.

    ``reach_k`` is the union of agent ``k``'s coverage over a uniform sample
    of its strategy interval (``samples`` points plus both endpoints); two
    active agents are neighbors iff their reaches intersect. The graph is a
    superset of the instantaneous-overlap graph at any fixed profile, so it
    stays valid for the whole run; spurious members only ever contribute
    empty-overlap terms.
    """
    reach: dict[int, np.ndarray] = {}
    for a in agents:
        if not a.active:
            continue
        thetas = np.unique(
            np.concatenate(
                [
                    a.strategy_space.sample(samples),
                    [a.strategy_space.lo, a.strategy_space.hi],
                ]
            )
        )
        sets = [coverage_fn(a.index, float(t)) for t in thetas]
        reach[a.index] = union_many(sets, grid=grid).mask
    graph: dict[int, set[int]] = {k: set() for k in reach}
    indices = sorted(reach)
    for i, k in enumerate(indices):
        for l in indices[i + 1 :]:
            if bool(np.any(reach[k] & reach[l])):
                graph[k].add(l)
                graph[l].add(k)
    return {k: frozenset(v) for k, v in graph.items()}


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of an approximate-equilibrium scan.

    ``worst_gain`` is the largest unilateral local-objective improvement found
    over all active agents; the profile is certified iff it does not exceed
    ``epsilon``.
    """

    certified: bool
    epsilon: float
    worst_agent: int | None
    worst_gain: float
    gains: dict[int, float] = field(default_factory=dict)


def certify_epsilon_equilibrium(
    game: GameInstance,
    profile: StrategyProfile,
    epsilon: float,
    scan_resolution: float,
    refine: ScalarMaximizerConfig | None = None,
) -> CertificationReport:
    """Check that no active agent can gain more than ``epsilon`` unilaterally.

    Each agent's strategy interval is scanned at ``scan_resolution`` radians
    (plus golden-section refinement around the best probe) against the frozen
    strategies of its neighbors.
    """
    if not (epsilon > 0.0):
        raise ValueError("epsilon must be positive")
    if not (scan_resolution > 0.0):
        raise ValueError("scan_resolution must be positive")
    game.validate_profile(profile)
    gains: dict[int, float] = {}
    worst_agent: int | None = None
    worst_gain = -np.inf
    for k in game.active_indices:
        agent = game.agent(k)
        points = max(3, int(round(agent.strategy_space.width / scan_resolution)) + 1)
        cfg = ScalarMaximizerConfig(
            coarse_points=points,
            refine_tolerance=refine.refine_tolerance if refine else 1e-5,
            max_refine_iters=refine.max_refine_iters if refine else 64,
        )
        view = {l: profile.for_agent(l) for l in game.neighbors(k)}
        f, batch = best_response_objective(game, k, view)
        incumbent = f(profile.for_agent(k))
        _, best = maximize_scalar(
            f, agent.strategy_space.lo, agent.strategy_space.hi, cfg, batch_f=batch
        )
        gain = best - incumbent
        gains[k] = gain
        if gain > worst_gain:
            worst_gain = gain
            worst_agent = k
    if not gains:
        worst_gain = 0.0
    certified = worst_gain <= epsilon
    return CertificationReport(
        certified=certified,
        epsilon=epsilon,
        worst_agent=worst_agent,
        worst_gain=float(worst_gain),
        gains=gains,
    )
