"""Repeated games in which the agent learns its adversary while playing.

The agent keeps a hypothesis of the game: the true game's structure with
its own switching function.  A learning agent feeds the adversary's moves
(the projection of the play onto adversary symbols, silent moves dropped)
to an SL_k learner and switches on each newly observed adversary move.
Whenever the hypothesis changes the attractor and strategy are recomputed.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import casestudy
from .game import (
    ADVERSARY,
    AGENT,
    EPSILON,
    GameAutomaton,
    GameState,
    SwitchingFunction,
    attractor,
    classify,
    optimal_strategy,
    sw_update,
)
from .inference import LEFT, RIGHT, learner_update, new_learner

logger = logging.getLogger(__name__)


class AgentKind(str, enum.Enum):
    LEARNING = "learning"
    FULL_KNOWLEDGE = "full_knowledge"
    NO_LEARNING = "no_learning"


class AdversaryKind(str, enum.Enum):
    OPTIMAL_DELAY = "optimal"
    UNIFORM_RANDOM = "random"
    WITHHOLDING = "withholding"


class Outcome(str, enum.Enum):
    WIN = "WIN"
    RESIGN = "RESIGN"
    TURN_LIMIT = "TURN_LIMIT"


def project_adversary(play, adversary_alphabet, keep_silent: bool = False) -> tuple:
    """Keep only adversary symbols of a play (silent moves dropped by default)."""
    symbols = set(adversary_alphabet)
    return tuple(s for s in play if s in symbols and (keep_silent or s != EPSILON))


def sw_from_grammar(grammar) -> SwitchingFunction:
    """Read a switching function off a 2-local grammar: ``uv`` licenses u -v->."""
    on = set()
    for f in grammar.factors:
        if len(f) == 2 and LEFT not in f and RIGHT not in f:
            on.add((f[0], f[1]))
    return SwitchingFunction(frozenset(on))


class Agent:
    """Agent policy with its own hypothesis game.

    ``learning`` starts from the naive static-world hypothesis (only silent
    adversary moves), ``full_knowledge`` from the true switching function,
    ``no_learning`` from the naive one and never changes it.  Moves follow
    the optimal strategy of the hypothesis; the first move in alphabet order
    is taken unless ``rng`` is given, in which case ties are drawn from it.

    A ``no_learning`` agent with ``frozen_belief`` also keeps believing the
    doors are as they were at the start of the game: it plans at that
    believed state, and if the planned move turns out to be blocked it is
    stuck and gives up (``stuck`` is set).  With ``frozen_belief=False`` it
    replans from the observed state every turn.
    """

    def __init__(self, kind, true_game: GameAutomaton, k: int = 2, frozen_belief: bool = True):
        self.kind = AgentKind(kind)
        self.k = k
        self.frozen_belief = frozen_belief and self.kind is AgentKind.NO_LEARNING
        self.belief_q2 = None
        self.stuck = False
        if self.kind is AgentKind.FULL_KNOWLEDGE:
            sw = true_game.sw
        else:
            sw = SwitchingFunction()
        self.game = true_game.with_sw(sw)
        sigma = tuple(a for a in true_game.adversary_alphabet if a != EPSILON)
        self.learner = new_learner(sigma, k) if self.kind is AgentKind.LEARNING else None
        self.word = ()
        self.observations = []
        self.solves = 0
        self._solve()

    @property
    def sw(self) -> SwitchingFunction:
        return self.game.sw

    def _solve(self):
        self.attr = attractor(self.game)
        self.strategy = optimal_strategy(self.game, self.attr)
        self.solves += 1

    def start_game(self, q0: GameState):
        """A new presentation begins with the adversary's initial state."""
        self.word = ()
        self.belief_q2 = q0.q2
        self.stuck = False
        if self.learner is not None:
            self.word = (q0.q2,)
            self.learner = learner_update(self.learner, self.word)

    def observe(self, q2_before, sigma) -> bool:
        """Record an adversary move; True if the hypothesis changed."""
        if sigma not in self.game.adversary_alphabet:
            raise ValueError(f"unknown adversary action {sigma!r}")
        self.observations.append((q2_before, sigma))
        if self.kind is not AgentKind.LEARNING or sigma == EPSILON:
            return False
        self.word = self.word + (sigma,)
        self.learner = learner_update(self.learner, self.word)
        if self.sw(q2_before, sigma):
            return False
        self.game = self.game.with_sw(sw_update(self.sw, q2_before, sigma))
        self._solve()
        return True

    def verdict(self, q: GameState):
        return classify(self.game, self.attr, q)

    def move(self, q: GameState, rng=None) -> Optional[str]:
        """Optimal move under the hypothesis, or None to resign."""
        believed = q._replace(q2=self.belief_q2) if self.frozen_belief else q
        if not self.verdict(believed).winning:
            return None
        sym = self.strategy.choose(believed, rng)
        if sym is None or self.game.successor(q, sym) is None:
            self.stuck = True
            return None
        return sym


def observe_and_learn(agent: Agent, q2_before, sigma) -> Agent:
    agent.observe(q2_before, sigma)
    return agent


def agent_move(agent: Agent, q: GameState, rng=None) -> Optional[str]:
    if q.turn != AGENT:
        raise ValueError("not the agent's turn")
    return agent.move(q, rng)


def _pick(options, rng):
    if rng is None or len(options) == 1:
        return options[0]
    return options[int(rng.integers(len(options)))]


def adversary_move(kind, true_game: GameAutomaton, attr_true, q: GameState, rng=None, agent_sw=None) -> str:
    """Choose an adversary symbol that is legal in the true game.

    ``optimal``: inside the true trap keep the play in the trap, otherwise
    maximize the successor's rank; ties are drawn from ``rng`` (first in
    alphabet order without one).  ``random``: uniform over legal moves.
    ``withholding``: restrict to moves the agent has already seen (with
    ``agent_sw``), choose among them as ``optimal`` does, else pass.
    """
    kind = AdversaryKind(kind)
    if q.turn != ADVERSARY:
        raise ValueError("not the adversary's turn")
    moves = true_game.moves(true_game.index[q])
    if not moves:
        return EPSILON
    if kind is AdversaryKind.UNIFORM_RANDOM:
        return _pick([s for s, _ in moves], rng)
    if kind is AdversaryKind.WITHHOLDING:
        seen = [(s, j) for s, j in moves if agent_sw is not None and agent_sw(q.q2, s)]
        if not seen:
            return EPSILON
        moves = seen
    rank = attr_true.rank
    states = true_game.states
    if q not in rank:
        trap = [s for s, j in moves if states[j] not in rank]
        if trap:
            return _pick(trap, rng)
    best = max(rank.get(states[j], -1) for _, j in moves)
    return _pick([s for s, j in moves if rank.get(states[j], -1) == best], rng)


@dataclass
class Round:
    mover: str
    symbol: str
    state: GameState
    learned: bool = False


@dataclass
class GameTrace:
    game_id: int
    initial: GameState
    rounds: list = field(default_factory=list)
    outcome: Optional[Outcome] = None
    stuck: bool = False
    discovery_ratio: float = 0.0
    cumulative_turns: int = 0

    @property
    def agent_turns(self) -> int:
        return sum(1 for r in self.rounds if r.mover == "agent")

    @property
    def adversary_turns(self) -> int:
        return sum(1 for r in self.rounds if r.mover == "adversary")

    def play(self) -> tuple:
        return tuple(r.symbol for r in self.rounds)

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id,
            "initial": list(self.initial),
            "outcome": self.outcome.value,
            "stuck": self.stuck,
            "rounds": [
                {"mover": r.mover, "symbol": r.symbol, "state": list(r.state), "learned": r.learned}
                for r in self.rounds
            ],
        }


@dataclass
class Metrics:
    turns_total: int = 0
    games_played: int = 0
    wins: int = 0
    discovery: list = field(default_factory=list)  # (cumulative turns, ratio)

    @property
    def discovery_ratio(self) -> float:
        return self.discovery[-1][1] if self.discovery else 0.0

    @property
    def win_rate(self) -> float:
        return self.wins / self.games_played if self.games_played else 0.0

    def turns_to_converge(self) -> Optional[int]:
        for turns, ratio in self.discovery:
            if ratio >= 1.0:
                return turns
        return None


@dataclass
class ExperimentConfig:
    regime: str = "opposite"
    agent: str = "learning"
    adversary: str = "optimal"
    seed: int = 0
    games: int = 300
    max_total_turns: Optional[int] = None
    max_game_turns: int = 100
    k: int = 2
    random_agent_ties: bool = False
    frozen_belief: bool = True

    def __post_init__(self):
        casestudy.regime_pairs(self.regime)
        self.agent = AgentKind(self.agent).value
        self.adversary = AdversaryKind(self.adversary).value
        if self.games < 0 or self.max_game_turns < 1:
            raise ValueError("game counts must be positive")


def game_rngs(seed: int, game_id: int):
    """Independent streams for one game: initial draw, adversary, agent ties."""
    return tuple(np.random.default_rng([seed, game_id, stream]) for stream in range(3))


def discovery_ratio(sw: SwitchingFunction, true_sw: SwitchingFunction) -> float:
    if not true_sw.on:
        return 1.0
    return len(sw.on & true_sw.on) / len(true_sw.on)


def play_game(agent: Agent, adversary, true_game, attr_true, q0, rngs, max_game_turns, turns_left=None, game_id=0):
    """Play one game from ``q0``; returns the trace (turn counts included)."""
    _, adv_rng, tie_rng = rngs
    trace = GameTrace(game_id, q0)
    agent.start_game(q0)
    q = q0
    final = true_game.final
    limit = max_game_turns if turns_left is None else min(max_game_turns, turns_left)
    while True:
        if len(trace.rounds) >= limit:
            trace.outcome = Outcome.TURN_LIMIT
            return trace
        sym = agent.move(q, tie_rng)
        if sym is None:
            trace.outcome = Outcome.RESIGN
            trace.stuck = agent.stuck
            return trace
        nxt = true_game.successor(q, sym)
        if nxt is None:
            raise RuntimeError(f"agent chose illegal move {sym!r} at {q}")
        q = nxt
        trace.rounds.append(Round("agent", sym, q))
        if true_game.index[q] in final:
            trace.outcome = Outcome.WIN
            return trace
        if len(trace.rounds) >= limit:
            trace.outcome = Outcome.TURN_LIMIT
            return trace
        sym = adversary_move(adversary, true_game, attr_true, q, adv_rng, agent.sw)
        q2_before = q.q2
        q = true_game.successor(q, sym)
        learned = agent.observe(q2_before, sym)
        trace.rounds.append(Round("adversary", sym, q, learned))


def run_repeated(config: ExperimentConfig, true_game: Optional[GameAutomaton] = None, agent: Optional[Agent] = None):
    """Play up to ``config.games`` games, restarting after every game with
    the agent's knowledge retained.  Returns ``(metrics, traces)``."""
    true_game = true_game or casestudy.build_scenario(config.regime)
    attr_true = attractor(true_game)
    agent = agent or Agent(config.agent, true_game, config.k, config.frozen_belief)
    metrics = Metrics()
    metrics.discovery.append((0, discovery_ratio(agent.sw, true_game.sw)))
    traces = []
    initials = [true_game.states[i] for i in true_game.initial]
    for gid in range(config.games):
        turns_left = None
        if config.max_total_turns is not None:
            turns_left = config.max_total_turns - metrics.turns_total
            if turns_left <= 0:
                break
        rngs = game_rngs(config.seed, gid)
        q0 = initials[int(rngs[0].integers(len(initials)))]
        if not config.random_agent_ties:
            rngs = (rngs[0], rngs[1], None)
        trace = play_game(
            agent, config.adversary, true_game, attr_true, q0, rngs, config.max_game_turns, turns_left, gid
        )
        for r in trace.rounds:
            metrics.turns_total += 1
            if r.learned:
                metrics.discovery.append((metrics.turns_total, discovery_ratio(agent.sw, true_game.sw)))
        metrics.games_played += 1
        metrics.wins += trace.outcome is Outcome.WIN
        trace.discovery_ratio = discovery_ratio(agent.sw, true_game.sw)
        trace.cumulative_turns = metrics.turns_total
        traces.append(trace)
        logger.debug("game %d from %s: %s", gid, q0, trace.outcome.value)
    return metrics, traces


CSV_FIELDS = (
    "game_id",
    "seed",
    "initial_state",
    "outcome",
    "agent_turns",
    "adversary_turns",
    "cumulative_turns",
    "discovery_ratio",
)


def csv_rows(config: ExperimentConfig, traces):
    for t in traces:
        yield {
            "game_id": t.game_id,
            "seed": config.seed,
            "initial_state": str(t.initial),
            "outcome": t.outcome.value,
            "agent_turns": t.agent_turns,
            "adversary_turns": t.adversary_turns,
            "cumulative_turns": t.cumulative_turns,
            "discovery_ratio": f"{t.discovery_ratio:.6f}",
        }
