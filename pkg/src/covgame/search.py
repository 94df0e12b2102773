"""Synchronous distributed search for a coverage-game equilibrium.

Agents run in lockstep rounds. In each round the gated agents compute a best
response against their neighbors' last exchanged strategies and report the
improvement ("regret"); after a regret exchange, only agents whose regret
exceeds ``epsilon`` and dominates their whole neighborhood (ties to the
smallest index) adopt their proposal. Since no two adopters are ever
neighbors, the global objective rises by exactly the sum of adopted regrets,
which yields convergence to an epsilon-equilibrium in finitely many rounds.

The per-agent gate ``zeta`` skips the expensive best-response step for agents
whose whole neighborhood was quiet in the previous round, so rounds after
convergence cost next to nothing.

All inter-agent information flow goes through explicit per-round exchange
views; an update never reads state beyond the agent itself and its graph
neighbors, and an :class:`AccessAudit` can record every cross-agent read.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterator, Mapping

from .game import (
    CertificationReport,
    GameInstance,
    StrategyProfile,
    best_response_objective,
    certify_epsilon_equilibrium,
    global_value,
)
from .optimize import ScalarMaximizerConfig, maximize_scalar


@dataclass(frozen=True)
class SearchConfig:
    """Engine settings: accuracy, round budget, scalar-solver settings."""

    epsilon: float
    max_rounds: int
    scalar: ScalarMaximizerConfig = ScalarMaximizerConfig()

    def __post_init__(self) -> None:
        if not (self.epsilon > 0.0):
            raise ValueError("epsilon must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")


@dataclass
class AgentRoundState:
    """Mutable per-agent state carried between rounds."""

    theta: float
    zeta: bool = True
    last_regret: float = 0.0
    proposed_theta: float = 0.0


@dataclass(frozen=True)
class RoundTrace:
    """Record of one synchronous round.

    ``phi`` is the global objective after the round's adoptions. ``zetas``
    holds the gates as they stand for the next round. ``wall_time`` covers
    the agents' computations and exchanges only; evaluating ``phi`` for this
    record is diagnostic and not charged to the round.
    """

    iteration: int
    phi: float
    innovators: tuple[int, ...]
    regrets: dict[int, float]
    zetas: dict[int, bool]
    wall_time: float

    @property
    def max_regret(self) -> float:
        return max(self.regrets.values(), default=0.0)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a full engine run."""

    final_profile: StrategyProfile
    converged_at: int | None
    traces: tuple[RoundTrace, ...]
    certified: bool
    certification: CertificationReport


class AccessAudit:
    """Recorder of cross-agent state reads made during a run."""

    def __init__(self) -> None:
        self.reads: list[tuple[int, int, str]] = []

    def record(self, reader: int, owner: int, kind: str) -> None:
        self.reads.append((reader, owner, kind))

    def violations(self, graph: Mapping[int, frozenset[int]]) -> list[tuple[int, int, str]]:
        """Reads of state owned by neither the reader nor one of its neighbors."""
        return [
            (reader, owner, kind)
            for reader, owner, kind in self.reads
            if owner != reader and owner not in graph[reader]
        ]


class _ExchangeView(Mapping[int, float]):
    """Read access to the values one agent received from its neighbors."""

    def __init__(
        self,
        reader: int,
        values: dict[int, float],
        kind: str,
        audit: AccessAudit | None,
    ) -> None:
        self._reader = reader
        self._values = values
        self._kind = kind
        self._audit = audit

    def __getitem__(self, owner: int) -> float:
        if self._audit is not None:
            self._audit.record(self._reader, owner, self._kind)
        return self._values[owner]

    def __iter__(self) -> Iterator[int]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)


def _qualifies(
    k: int, r_k: float, neighbors: frozenset[int], neighbor_regrets: Mapping[int, float],
    epsilon: float,
) -> bool:
    """Election predicate for one agent given its neighborhood's regrets.

    Qualify iff the own regret exceeds ``epsilon``, is at least every
    neighbor's regret, and no smaller-indexed neighbor ties it exactly. Ties
    use exact float equality: plateau objectives genuinely produce them, and
    the index rule is the deterministic tie-break.
    """
    if not math.isfinite(r_k):
        raise ValueError(f"regret of agent {k} is not finite")
    if r_k <= epsilon:
        return False
    for l in neighbors:
        r_l = neighbor_regrets[l]
        if r_l > r_k or (r_l == r_k and l < k):
            return False
    return True


def elect_innovators(
    regrets: Mapping[int, float],
    neighbor_graph: Mapping[int, frozenset[int]],
    epsilon: float,
) -> tuple[int, ...]:
    """Agents allowed to adopt their proposal this round.

    Each agent's decision depends only on its own regret and its neighbors';
    two elected agents are therefore never neighbors.
    """
    return tuple(
        sorted(
            k
            for k, r_k in regrets.items()
            if _qualifies(k, r_k, neighbor_graph[k], regrets, epsilon)
        )
    )


def run_round(
    game: GameInstance,
    states: dict[int, AgentRoundState],
    cfg: SearchConfig,
    iteration: int = 0,
    audit: AccessAudit | None = None,
) -> tuple[dict[int, AgentRoundState], RoundTrace]:
    """Execute one synchronous round and return the new states and its trace.

    Phases: (a) gated agents pull their neighbors' strategies and compute a
    best response and its regret, ungated agents report zero regret; (b) all
    agents exchange regrets; (c) the elected agents adopt their proposals and
    stay gated on; (d) everyone else keeps its strategy and stays gated on
    iff some regret in its closed neighborhood exceeded ``epsilon``.
    """
    t_start = time.perf_counter()
    thetas = {k: s.theta for k, s in states.items()}
    regrets: dict[int, float] = {}
    proposals: dict[int, float] = {}

    for k in game.active_indices:
        state = states[k]
        if state.zeta:
            view = _ExchangeView(
                k, {l: thetas[l] for l in game.neighbors(k)}, "theta", audit
            )
            f, batch = best_response_objective(game, k, view)
            incumbent = f(state.theta)
            space = game.agent(k).strategy_space
            try:
                theta_star, best = maximize_scalar(
                    f, space.lo, space.hi, cfg.scalar, batch_f=batch
                )
            except ValueError as exc:
                raise RuntimeError(f"best-response solve failed for agent {k}") from exc
            proposals[k] = theta_star
            regrets[k] = best - incumbent
        else:
            proposals[k] = state.theta
            regrets[k] = 0.0

    innovators = _elect_locally(game, regrets, cfg.epsilon, audit)

    new_states: dict[int, AgentRoundState] = {}
    for k in game.active_indices:
        regret_view = _ExchangeView(
            k, {l: regrets[l] for l in game.neighbors(k)}, "regret", audit
        )
        if k in innovators:
            new_states[k] = AgentRoundState(
                theta=proposals[k],
                zeta=True,
                last_regret=regrets[k],
                proposed_theta=proposals[k],
            )
        else:
            gate = regrets[k] > cfg.epsilon or any(
                regret_view[l] > cfg.epsilon for l in game.neighbors(k)
            )
            new_states[k] = AgentRoundState(
                theta=states[k].theta,
                zeta=gate,
                last_regret=regrets[k],
                proposed_theta=proposals[k],
            )

    wall_time = time.perf_counter() - t_start
    # The objective evaluation below is trace bookkeeping, not part of the
    # agents' computation, so it stays outside the timed section.
    profile = StrategyProfile.from_mapping(
        game.n_agents, {k: s.theta for k, s in new_states.items()}
    )
    phi = global_value(game, profile)
    trace = RoundTrace(
        iteration=iteration,
        phi=phi,
        innovators=innovators,
        regrets=dict(regrets),
        zetas={k: s.zeta for k, s in new_states.items()},
        wall_time=wall_time,
    )
    return new_states, trace


def _elect_locally(
    game: GameInstance,
    regrets: dict[int, float],
    epsilon: float,
    audit: AccessAudit | None,
) -> tuple[int, ...]:
    """Per-agent election decisions from own regret plus neighbors' regrets."""
    elected = []
    for k in game.active_indices:
        view = _ExchangeView(
            k, {l: regrets[l] for l in game.neighbors(k)}, "regret", audit
        )
        if _qualifies(k, regrets[k], game.neighbors(k), view, epsilon):
            elected.append(k)
    return tuple(sorted(elected))


def run_search(
    game: GameInstance,
    initial_profile: StrategyProfile,
    cfg: SearchConfig,
    audit: AccessAudit | None = None,
) -> SearchResult:
    """Run the full engine: ``cfg.max_rounds`` rounds plus a certification.

    All gates start open. ``converged_at`` is the index into ``traces`` of the
    first round that elected nobody; later rounds still run (they are cheap
    once the gates close) and never change the profile. The final profile is
    certified at ``cfg.epsilon`` with a scan resolution matching the engine's
    own best-response scan, so a run that converged always certifies.
    """
    game.validate_profile(initial_profile)
    states = {
        k: AgentRoundState(theta=initial_profile.for_agent(k), zeta=True)
        for k in game.active_indices
    }
    traces: list[RoundTrace] = []
    converged_at: int | None = None
    for p in range(1, cfg.max_rounds + 1):
        states, trace = run_round(game, states, cfg, iteration=p, audit=audit)
        traces.append(trace)
        if converged_at is None and not trace.innovators:
            converged_at = len(traces) - 1

    final_profile = StrategyProfile.from_mapping(
        game.n_agents, {k: s.theta for k, s in states.items()}
    )
    resolution = max(
        (
            game.agent(k).strategy_space.width / (cfg.scalar.coarse_points - 1)
            for k in game.active_indices
            if game.agent(k).strategy_space.width > 0
        ),
        default=1e-6,
    )
    certification = certify_epsilon_equilibrium(
        game, final_profile, cfg.epsilon, resolution, refine=cfg.scalar
    )
    return SearchResult(
        final_profile=final_profile,
        converged_at=converged_at,
        traces=tuple(traces),
        certified=certification.certified,
        certification=certification,
    )


def iteration_bound(phi_min: float, phi_max: float, epsilon: float) -> int:
    """Round budget sufficient for convergence given objective bounds.

    With the objective confined to ``[phi_min, phi_max]`` and every
    non-converged round improving it by more than ``epsilon``, at most
    ``floor((phi_max - phi_min) / epsilon) + 1`` rounds are needed.
    """
    if not (epsilon > 0.0):
        raise ValueError("epsilon must be positive")
    if phi_max < phi_min:
        raise ValueError("phi_max must be at least phi_min")
    return int(math.floor((phi_max - phi_min) / epsilon)) + 1
