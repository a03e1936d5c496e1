"""Turn-based games between an agent and a rule-governed adversary.

The game automaton is the product of the players' turn-based product with a
specification acceptor.  It is materialized once over the full adversary
scaffold; what the agent believes the adversary can do is a switching
function laid over the adversary's moves, so learning never rebuilds a
product.  Solving is the backward attractor fixpoint with rank layers.
"""
from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Hashable, Iterable, Mapping, NamedTuple, Optional

import numpy as np

from .automata import FSA, Semiautomaton, make_fsa

logger = logging.getLogger(__name__)

EPSILON = "eps"
AGENT, ADVERSARY = 1, 0


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class PlayerSpec:
    sa: Semiautomaton
    initial: frozenset
    can_pass: bool = False

    def __post_init__(self):
        object.__setattr__(self, "initial", frozenset(self.initial))
        if not self.initial <= set(self.sa.states):
            raise GameError("initial states must belong to the player")
        if self.can_pass:
            if EPSILON not in self.sa.alphabet:
                raise GameError("a passing player needs the silent symbol in its alphabet")
            if any(self.sa.step(q, EPSILON) != q for q in self.sa.states):
                raise GameError("the silent symbol must be a self-loop at every state")
        elif EPSILON in self.sa.alphabet:
            raise GameError("silent symbol present but can_pass is false")


@dataclass(frozen=True)
class InteractionFunction:
    """Symbols the *other* player may not initiate, keyed by (own, other) state."""

    table: Mapping = field(default_factory=dict)

    def __call__(self, own, other) -> frozenset:
        return frozenset(self.table.get((own, other), ())) - {EPSILON}


class GameState(NamedTuple):
    q1: Hashable
    q2: Hashable
    turn: int
    qs: Hashable = None

    def __str__(self):
        parts = [self.q1, self.q2, self.turn] if self.qs is None else [*self]
        return "(" + ",".join(str(p) for p in parts) + ")"


def turn_based_product(
    p1: PlayerSpec,
    p2: PlayerSpec,
    u1: Optional[InteractionFunction] = None,
    u2: Optional[InteractionFunction] = None,
) -> FSA:
    """The turn-based product as an acceptor.

    Initial states are the legitimate starts ``I1 x I2 x {1}``, every other
    state is final.  ``u2(q2, q1)`` blocks agent moves, ``u1(q1, q2)`` blocks
    adversary moves.
    """
    if p1.can_pass:
        raise GameError("the agent may not give up its turn")
    a1, a2 = p1.sa, p2.sa
    if set(a1.alphabet) & set(a2.alphabet):
        raise GameError("player alphabets must be disjoint")
    u1 = u1 or InteractionFunction()
    u2 = u2 or InteractionFunction()
    states = [GameState(x, y, c) for x in a1.states for y in a2.states for c in (AGENT, ADVERSARY)]
    trans = {}
    for x in a1.states:
        for y in a2.states:
            blocked = u2(y, x)
            for sym in a1.alphabet:
                dst = a1.step(x, sym)
                if dst is not None and sym not in blocked:
                    trans[(GameState(x, y, AGENT), sym)] = GameState(dst, y, ADVERSARY)
            blocked = u1(x, y)
            for sym in a2.alphabet:
                dst = a2.step(y, sym)
                if dst is not None and sym not in blocked:
                    trans[(GameState(x, y, ADVERSARY), sym)] = GameState(x, dst, AGENT)
    initial = {GameState(x, y, AGENT) for x in p1.initial for y in p2.initial}
    alphabet = a1.alphabet + a2.alphabet
    return make_fsa(states, alphabet, trans, initial, set(states) - initial)


@dataclass(frozen=True)
class SwitchingFunction:
    """0/1 mask over adversary moves; stores the pairs switched on.

    The silent symbol is always on.  On a game state the value is read off
    the adversary component, so one mask serves the whole game automaton.
    """

    on: frozenset = frozenset()

    def __call__(self, q2, sigma) -> int:
        return 1 if sigma == EPSILON or (q2, sigma) in self.on else 0

    def at(self, state: GameState, sigma) -> int:
        return self(state.q2, sigma)


def sw_update(sw: SwitchingFunction, q2, sigma) -> SwitchingFunction:
    if sigma == EPSILON or (q2, sigma) in sw.on:
        return sw
    return SwitchingFunction(sw.on | {(q2, sigma)})


@dataclass(frozen=True, eq=False)
class GameAutomaton:
    """Game states, the full scaffold of moves, and the current switch mask.

    ``edges[i]`` lists ``(symbol, j)`` for state ``states[i]`` in alphabet
    order, including adversary moves that ``sw`` currently switches off.
    """

    states: tuple
    agent_alphabet: tuple
    adversary_alphabet: tuple
    edges: tuple
    initial: tuple
    final: frozenset
    sw: SwitchingFunction = SwitchingFunction()
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {q: i for i, q in enumerate(self.states)})
        object.__setattr__(self, "_flat", None)

    def with_sw(self, sw: SwitchingFunction) -> "GameAutomaton":
        g = replace(self, sw=sw)
        object.__setattr__(g, "_flat", self._flat)
        return g

    def _scaffold_arrays(self):
        """Flattened scaffold: turns, edge sources and targets, and for each
        edge the id of its ``(q2, sigma)`` switch (-1 when always on)."""
        if self._flat is None:
            n = len(self.states)
            turn = np.fromiter((q.turn for q in self.states), dtype=np.int8, count=n)
            src, dst, pid = [], [], []
            pairs = {}
            for i, q in enumerate(self.states):
                adv = q.turn == ADVERSARY
                for s, j in self.edges[i]:
                    src.append(i)
                    dst.append(j)
                    pid.append(pairs.setdefault((q.q2, s), len(pairs)) if adv and s != EPSILON else -1)
            flat = (
                turn,
                np.asarray(src, dtype=np.int64),
                np.asarray(dst, dtype=np.int64),
                np.asarray(pid, dtype=np.int64),
                tuple(pairs),
            )
            object.__setattr__(self, "_flat", flat)
        return self._flat

    def enabled_arrays(self):
        """``(turn, src, dst)`` with ``src[e] -> dst[e]`` over enabled moves."""
        turn, src, dst, pid, pairs = self._scaffold_arrays()
        pair_on = np.fromiter((p in self.sw.on for p in pairs), dtype=bool, count=len(pairs))
        keep = pid < 0
        if len(pairs):
            keep |= pair_on[np.maximum(pid, 0)] & (pid >= 0)
        return turn, src[keep], dst[keep]

    def is_on(self, i: int, sym) -> bool:
        q = self.states[i]
        return q.turn == AGENT or self.sw(q.q2, sym) == 1

    def moves(self, i: int):
        """Enabled ``(symbol, j)`` pairs at state index ``i``."""
        q = self.states[i]
        if q.turn == AGENT:
            return self.edges[i]
        sw = self.sw
        return tuple(e for e in self.edges[i] if sw(q.q2, e[0]))

    def successor(self, q: GameState, sym) -> Optional[GameState]:
        i = self.index[q]
        for s, j in self.moves(i):
            if s == sym:
                return self.states[j]
        return None

    def enabled(self, q: GameState) -> tuple:
        return tuple(s for s, _ in self.moves(self.index[q]))

    def scaffold_pairs(self) -> list:
        """Every ``(q2, sigma)`` adversary move present in the scaffold."""
        seen = {}
        for i, q in enumerate(self.states):
            if q.turn == ADVERSARY:
                for s, _ in self.edges[i]:
                    if s != EPSILON:
                        seen.setdefault((q.q2, s), None)
        return list(seen)

    def transition_count(self) -> int:
        return sum(len(self.moves(i)) for i in range(len(self.states)))

    def to_fsa(self) -> FSA:
        trans = {(self.states[i], s): self.states[j] for i in range(len(self.states)) for s, j in self.moves(i)}
        return make_fsa(
            self.states,
            self.agent_alphabet + self.adversary_alphabet,
            trans,
            [self.states[i] for i in self.initial],
            [self.states[i] for i in self.final],
        )


def game_automaton(
    product: FSA,
    spec: FSA,
    init_link: Optional[Callable] = None,
    agent_alphabet: Optional[Iterable] = None,
    sw: Optional[SwitchingFunction] = None,
) -> GameAutomaton:
    """Synchronous product of a turn-based product with a specification.

    ``init_link`` maps a legitimate start ``(q1, q2, 1)`` to the specification
    state it begins in; without it every initial specification state is
    combined with every start.  Only states reachable from the initial set
    are materialized.  ``sw`` defaults to every scaffold move switched on.
    """
    lam = set(product.alphabet)
    if not lam <= set(spec.alphabet):
        raise GameError("specification alphabet must cover both players' symbols")
    if agent_alphabet is None:
        agent_alphabet = {a for (src, a) in product.transitions if src.turn == AGENT}
    agent_alphabet = tuple(a for a in product.alphabet if a in set(agent_alphabet))
    adversary_alphabet = tuple(a for a in product.alphabet if a not in set(agent_alphabet))
    spec_order = {q: i for i, q in enumerate(spec.states)}
    starts = [q for q in product.states if q in product.initial]
    initial = []
    for p in starts:
        if init_link is None:
            initial.extend(p._replace(qs=s) for s in sorted(spec.initial, key=spec_order.__getitem__))
            continue
        s = init_link(p)
        if s is None or s not in spec.initial:
            raise GameError(f"init_link gives no initial specification state for {p}")
        initial.append(p._replace(qs=s))

    index = {}
    states = []
    edges = []
    queue = deque()
    for q in initial:
        if q not in index:
            index[q] = len(states)
            states.append(q)
            queue.append(q)
    while queue:
        q = queue.popleft()
        p = GameState(q.q1, q.q2, q.turn)
        out = []
        for sym in product.alphabet:
            dp = product.transitions.get((p, sym))
            if dp is None:
                continue
            ds = spec.transitions.get((q.qs, sym))
            if ds is None:
                continue
            dst = GameState(dp.q1, dp.q2, dp.turn, ds)
            if dst not in index:
                index[dst] = len(states)
                states.append(dst)
                queue.append(dst)
            out.append((sym, index[dst]))
        edges.append(tuple(out))
    final = frozenset(i for i, q in enumerate(states) if q.turn == ADVERSARY and q.qs in spec.final)
    g = GameAutomaton(
        tuple(states),
        agent_alphabet,
        adversary_alphabet,
        tuple(edges),
        tuple(index[q] for q in dict.fromkeys(initial)),
        final,
    )
    if sw is None:
        sw = SwitchingFunction(frozenset(g.scaffold_pairs()))
    logger.debug("game automaton: %d states, %d initial", len(states), len(g.initial))
    return g.with_sw(sw)


@dataclass(frozen=True)
class AttractorResult:
    rank: dict
    layers: tuple

    @property
    def attractor(self) -> frozenset:
        return frozenset(self.rank)

    def __contains__(self, q) -> bool:
        return q in self.rank


def attractor_indices(g: GameAutomaton):
    """Rank per state index (-1 outside the attractor) and the index layers.

    Backward counting: an adversary state keeps the number of its enabled
    moves not yet known to land in the attractor and joins when that count
    reaches zero; an agent state joins on its first attracted successor.
    An adversary state without enabled moves joins at rank 1 (the stuck
    player loses); a stuck agent state never joins.  Predecessors
    are kept in CSR arrays so each layer is expanded in one vectorized pass.
    """
    n = len(g.states)
    turn, src, dst = g.enabled_arrays()
    pending = np.bincount(src, minlength=n)
    pred = src[np.argsort(dst, kind="stable")]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=indptr[1:])

    rank = np.full(n, -1, dtype=np.int64)
    current = np.array(sorted(g.final), dtype=np.int64)
    rank[current] = 0
    layers = [current.tolist()]
    r = 0
    while True:
        lo, hi = indptr[current], indptr[current + 1]
        counts = hi - lo
        offsets = np.repeat(lo - np.cumsum(counts) + counts, counts) + np.arange(counts.sum())
        p = pred[offsets]
        p = p[rank[p] < 0]
        on_agent = turn[p] == AGENT
        joined = [np.unique(p[on_agent])]
        cand, hits = np.unique(p[~on_agent], return_counts=True)
        pending[cand] -= hits
        joined.append(cand[pending[cand] == 0])
        if r == 0:
            joined.append(np.flatnonzero((rank < 0) & (turn == ADVERSARY) & (pending == 0)))
        nxt = np.unique(np.concatenate(joined))
        if nxt.size == 0:
            break
        r += 1
        rank[nxt] = r
        layers.append(nxt.tolist())
        current = nxt
    return rank.tolist(), layers


def attractor(g: GameAutomaton) -> AttractorResult:
    rank, layers = attractor_indices(g)
    states = g.states
    return AttractorResult(
        {states[i]: r for i, r in enumerate(rank) if r >= 0},
        tuple(frozenset(states[i] for i in layer) for layer in layers),
    )


def winning_initials(g: GameAutomaton, attr: AttractorResult) -> frozenset:
    return frozenset(g.states[i] for i in g.initial if g.states[i] in attr.rank)


@dataclass(frozen=True)
class Verdict:
    winning: bool
    rank: Optional[int] = None

    def __str__(self):
        return f"WINNING({self.rank})" if self.winning else "TRAPPED"


TRAPPED = Verdict(False)


def classify(g: GameAutomaton, attr: AttractorResult, q: GameState) -> Verdict:
    r = attr.rank.get(q)
    return TRAPPED if r is None else Verdict(True, r)


@dataclass(frozen=True)
class Strategy:
    """Permitted agent moves at each ranked agent state.

    ``moves(q)`` is empty for states outside the attractor (trapped) and for
    states that need no move.
    """

    table: Mapping

    def moves(self, q) -> tuple:
        return self.table.get(q, ())

    def __contains__(self, q):
        return q in self.table

    def __len__(self):
        return len(self.table)

    def choose(self, q, rng=None):
        options = self.moves(q)
        if not options:
            return None
        if rng is None:
            return options[0]
        return options[int(rng.integers(len(options)))]


def optimal_strategy(g: GameAutomaton, attr: AttractorResult) -> Strategy:
    """Moves that step from layer i to layer i-1, in alphabet order."""
    rank = attr.rank
    table = {}
    for i, q in enumerate(g.states):
        r = rank.get(q)
        if q.turn != AGENT or not r:
            continue
        table[q] = tuple(s for s, j in g.moves(i) if rank.get(g.states[j]) == r - 1)
    return Strategy(table)


def winning_strategy(g: GameAutomaton, attr: AttractorResult) -> Strategy:
    """All agent moves that stay inside the attractor."""
    table = {}
    for i, q in enumerate(g.states):
        if q.turn == AGENT and q in attr.rank:
            table[q] = tuple(s for s, j in g.moves(i) if g.states[j] in attr.rank)
    return Strategy(table)


# -- export -----------------------------------------------------------------


def _state_json(q: GameState):
    return [q.q1, q.q2, q.turn, q.qs]


def game_to_dict(g: GameAutomaton) -> dict:
    transitions = [[i, s, j] for i in range(len(g.states)) for s, j in g.edges[i]]
    sw = [{"state": q2, "symbol": s, "on": g.sw(q2, s)} for q2, s in g.scaffold_pairs()]
    return {
        "agent_alphabet": list(g.agent_alphabet),
        "adversary_alphabet": list(g.adversary_alphabet),
        "states": [_state_json(q) for q in g.states],
        "initial": list(g.initial),
        "final": sorted(g.final),
        "transitions": transitions,
        "sw": sw,
    }


def game_from_dict(doc: Mapping) -> GameAutomaton:
    try:
        states = tuple(GameState(q1, q2, int(c), qs) for q1, q2, c, qs in doc["states"])
        edges = [[] for _ in states]
        for i, s, j in doc["transitions"]:
            edges[i].append((s, j))
        on = frozenset((e["state"], e["symbol"]) for e in doc["sw"] if e["on"])
        g = GameAutomaton(
            states,
            tuple(doc["agent_alphabet"]),
            tuple(doc["adversary_alphabet"]),
            tuple(tuple(e) for e in edges),
            tuple(doc["initial"]),
            frozenset(doc["final"]),
            SwitchingFunction(on),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise GameError(f"malformed game document: {exc}") from exc
    for i, q in enumerate(states):
        for s, j in g.edges[i]:
            if not 0 <= j < len(states):
                raise GameError(f"transition target {j} out of range")
            owner = g.agent_alphabet if q.turn == AGENT else g.adversary_alphabet
            if s not in owner:
                raise GameError(f"symbol {s!r} played at the wrong turn in {q}")
    return g


def dump_game(g: GameAutomaton) -> str:
    return json.dumps(game_to_dict(g), ensure_ascii=False) + "\n"


def load_game(text: str) -> GameAutomaton:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"malformed game document: {exc}") from exc
    return game_from_dict(doc)


def export_game_dot(g: GameAutomaton, attr: Optional[AttractorResult] = None) -> str:
    """DOT graph of the enabled game; attractor states are filled and ranked."""
    rank = attr.rank if attr is not None else {}
    initial = set(g.initial)
    lines = ['digraph "game" {', "  rankdir=LR;", "  node [shape=box];"]
    for i, q in enumerate(g.states):
        label = str(q)
        attrs = []
        if q in rank:
            label += f"\\nrank {rank[q]}"
            attrs.append("style=filled, fillcolor=lightgray")
        if i in g.final:
            attrs.append("peripheries=2")
        if i in initial:
            attrs.append("penwidth=2")
        attrs.insert(0, f'label="{label}"')
        lines.append(f"  s{i} [{', '.join(attrs)}];")
    for i in range(len(g.states)):
        for s, j in g.moves(i):
            lines.append(f'  s{i} -> s{j} [label="{s}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
