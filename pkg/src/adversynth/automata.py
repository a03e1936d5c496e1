"""Deterministic semiautomata and finite-state acceptors.

Transition functions are partial: a missing ``(state, symbol)`` entry means
the move is undefined, there is no implicit sink.  Symbols are strings and
the alphabet is an ordered tuple; every iteration over symbols follows that
declaration order so results are reproducible.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

State = Hashable
Symbol = str
Word = Sequence[Symbol]


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class Semiautomaton:
    """A deterministic transition structure ``<Q, Sigma, T>``."""

    states: tuple
    alphabet: tuple
    transitions: Mapping[tuple, State] = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(dict.fromkeys(self.states))
        alphabet = tuple(dict.fromkeys(self.alphabet))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        known, symbols = set(states), set(alphabet)
        trans = {}
        for (src, sym), dst in dict(self.transitions).items():
            if src not in known or dst not in known:
                raise AutomatonError(f"transition {src!r} -{sym}-> {dst!r} uses an unknown state")
            if sym not in symbols:
                raise AutomatonError(f"transition label {sym!r} not in alphabet")
            trans[(src, sym)] = dst
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "_rank", {a: i for i, a in enumerate(alphabet)})

    def __hash__(self):
        return hash((self.states, self.alphabet, frozenset(self.transitions.items())))

    def __eq__(self, other):
        if not isinstance(other, Semiautomaton):
            return NotImplemented
        return (
            set(self.states) == set(other.states)
            and self.alphabet == other.alphabet
            and self.transitions == other.transitions
        )

    def step(self, q: State, sym: Symbol) -> Optional[State]:
        return self.transitions.get((q, sym))

    def edges(self):
        """Yield ``(src, symbol, dst)`` in state order, then symbol order."""
        for q in self.states:
            for a in self.alphabet:
                dst = self.transitions.get((q, a))
                if dst is not None:
                    yield q, a, dst

    def symbol_key(self, sym: Symbol) -> int:
        return self._rank[sym]


@dataclass(frozen=True, eq=False)
class FSA:
    """A semiautomaton together with initial and final state sets."""

    core: Semiautomaton
    initial: frozenset = frozenset()
    final: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "final", frozenset(self.final))
        states = set(self.core.states)
        if not self.initial <= states:
            raise AutomatonError("initial states must be a subset of states")
        if not self.final <= states:
            raise AutomatonError("final states must be a subset of states")

    @property
    def states(self):
        return self.core.states

    @property
    def alphabet(self):
        return self.core.alphabet

    @property
    def transitions(self):
        return self.core.transitions

    def accepts(self, word: Word) -> bool:
        for q0 in self.initial:
            q = run(self.core, q0, word)
            if q is not None and q in self.final:
                return True
        return False


def make_fsa(states, alphabet, transitions, initial=(), final=()) -> FSA:
    return FSA(Semiautomaton(tuple(states), tuple(alphabet), dict(transitions)), initial, final)


def _core(x) -> Semiautomaton:
    return x.core if isinstance(x, FSA) else x


def enabled(sa, q: State) -> tuple:
    """Symbols with a defined transition at ``q``, in alphabet order."""
    sa = _core(sa)
    if q not in set(sa.states):
        raise AutomatonError("state not in automaton")
    return tuple(a for a in sa.alphabet if (q, a) in sa.transitions)


def run(sa, q0: State, word: Word) -> Optional[State]:
    sa = _core(sa)
    symbols = set(sa.alphabet)
    q = q0
    for a in word:
        if a not in symbols:
            raise AutomatonError(f"symbol {a!r} not in alphabet")
        if q is None:
            continue
        q = sa.transitions.get((q, a))
    return q


def levels(fsa: FSA) -> dict:
    """Breadth-first distance of every reachable state from the initial set."""
    order = {q: i for i, q in enumerate(fsa.states)}
    level = {}
    queue = deque()
    for q in sorted(fsa.initial, key=order.__getitem__):
        level[q] = 0
        queue.append(q)
    while queue:
        q = queue.popleft()
        for a in fsa.alphabet:
            dst = fsa.transitions.get((q, a))
            if dst is not None and dst not in level:
                level[dst] = level[q] + 1
                queue.append(dst)
    return level


def reachable_states(fsa: FSA) -> set:
    return set(levels(fsa))


def coreachable_states(fsa: FSA) -> set:
    preds = {}
    for src, _, dst in fsa.core.edges():
        preds.setdefault(dst, []).append(src)
    seen = set(fsa.final)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in preds.get(q, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def restrict(fsa: FSA, keep) -> FSA:
    keep = set(keep)
    states = [q for q in fsa.states if q in keep]
    trans = {(s, a): d for (s, a), d in fsa.transitions.items() if s in keep and d in keep}
    return make_fsa(states, fsa.alphabet, trans, fsa.initial & keep, fsa.final & keep)


def trim(fsa: FSA) -> FSA:
    """Drop states that are unreachable or cannot reach a final state."""
    return restrict(fsa, reachable_states(fsa) & coreachable_states(fsa))


_SINK = object()


def _single_initial(fsa: FSA):
    if len(fsa.initial) > 1:
        raise AutomatonError("operation needs at most one initial state")
    return next(iter(fsa.initial), None)


def minimize(fsa: FSA) -> FSA:
    """Canonical DFA for ``L(fsa)`` by Hopcroft partition refinement.

    The result is trimmed: every state is reachable and co-reachable, so the
    transition function stays partial.  The empty language is represented
    by a single non-final initial state ``0`` without transitions.  States
    of the result are numbered ``0..n-1`` in breadth-first order.
    """
    q0 = _single_initial(fsa)
    alphabet = fsa.alphabet
    useful = reachable_states(fsa) & coreachable_states(fsa) if q0 is not None else set()
    if q0 is None or q0 not in useful:
        return make_fsa([0], alphabet, {}, [0], [])

    states = [q for q in fsa.states if q in useful] + [_SINK]
    index = {q: i for i, q in enumerate(states)}
    sink = index[_SINK]
    n = len(states)
    delta = [[sink] * len(alphabet) for _ in range(n)]
    for q in states[:-1]:
        for j, a in enumerate(alphabet):
            dst = fsa.transitions.get((q, a))
            if dst in index:
                delta[index[q]][j] = index[dst]
    inverse = [[[] for _ in range(n)] for _ in alphabet]
    for i in range(n):
        for j in range(len(alphabet)):
            inverse[j][delta[i][j]].append(i)

    finals = {index[q] for q in fsa.final if q in index}
    blocks = [b for b in (finals, set(range(n)) - finals) if b]
    block_of = [0] * n
    for b, members in enumerate(blocks):
        for i in members:
            block_of[i] = b
    work = deque((b, j) for b in range(len(blocks)) for j in range(len(alphabet)))
    queued = set(work)
    while work:
        b, j = work.popleft()
        queued.discard((b, j))
        splitter = set()
        for t in blocks[b]:
            splitter.update(inverse[j][t])
        touched = {}
        for i in splitter:
            touched.setdefault(block_of[i], set()).add(i)
        for c, inside in touched.items():
            if len(inside) == len(blocks[c]):
                continue
            rest = blocks[c] - inside
            small, large = (inside, rest) if len(inside) <= len(rest) else (rest, inside)
            blocks[c] = large
            new = len(blocks)
            blocks.append(small)
            for i in small:
                block_of[i] = new
            # block c keeps the larger half, so queueing the new block covers
            # both the "already pending" and the "smaller half" cases
            for k in range(len(alphabet)):
                work.append((new, k))
                queued.add((new, k))

    start = block_of[index[q0]]
    sink_block = block_of[sink]
    numbering = {start: 0}
    queue = deque([start])
    trans = {}
    while queue:
        b = queue.popleft()
        rep = next(iter(blocks[b]))
        for j, a in enumerate(alphabet):
            tb = block_of[delta[rep][j]]
            if tb == sink_block:
                continue
            if tb not in numbering:
                numbering[tb] = len(numbering)
                queue.append(tb)
            trans[(numbering[b], a)] = numbering[tb]
    final = {numbering[b] for b in numbering if blocks[b] & finals}
    return make_fsa(range(len(numbering)), alphabet, trans, [0], final)


def language_equivalent(a: FSA, b: FSA) -> bool:
    """True iff both deterministic acceptors define the same language."""
    if set(a.alphabet) != set(b.alphabet):
        raise AutomatonError("alphabet mismatch")
    qa, qb = _single_initial(a), _single_initial(b)
    start = (qa, qb)
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        if (x in a.final) != (y in b.final):
            return False
        for sym in a.alphabet:
            nxt = (
                a.transitions.get((x, sym)) if x is not None else None,
                b.transitions.get((y, sym)) if y is not None else None,
            )
            if nxt == (None, None):
                continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return True


def _dot_id(q) -> str:
    text = state_name(q).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


def export_dot(x, name: str = "automaton") -> str:
    """Render an automaton as a Graphviz digraph.

    Initial states get an incoming arrow from an invisible point node and
    final states are drawn as double circles.  Parallel edges between the
    same pair of states are merged into one comma-separated label.
    """
    sa = _core(x)
    initial = x.initial if isinstance(x, FSA) else frozenset()
    final = x.final if isinstance(x, FSA) else frozenset()
    lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;"]
    for i, q in enumerate(sa.states):
        shape = "doublecircle" if q in final else "circle"
        lines.append(f"  {_dot_id(q)} [shape={shape}];")
        if q in initial:
            lines.append(f'  "__init{i}" [shape=point, label=""];')
            lines.append(f'  "__init{i}" -> {_dot_id(q)};')
    merged = {}
    for src, sym, dst in sa.edges():
        merged.setdefault((src, dst), []).append(sym)
    for (src, dst), labels in merged.items():
        label = ",".join(labels).replace('"', '\\"')
        lines.append(f'  {_dot_id(src)} -> {_dot_id(dst)} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def state_name(q) -> str:
    """Printable name of a state; tuple states (factor windows) are spelled
    out as words, with the empty tuple written as λ."""
    if isinstance(q, tuple):
        parts = [str(a) for a in q]
        if not parts:
            return "λ"
        return "".join(parts) if all(len(a) == 1 for a in parts) else " ".join(parts)
    return str(q)


def to_dict(x) -> dict:
    sa = _core(x)
    name = {q: state_name(q) for q in sa.states}
    if len(set(name.values())) != len(name):
        name = {q: str(q) for q in sa.states}
    doc = {
        "alphabet": list(sa.alphabet),
        "states": [name[q] for q in sa.states],
        "transitions": [{"from": name[s], "label": a, "to": name[d]} for s, a, d in sa.edges()],
    }
    if isinstance(x, FSA):
        order = {q: i for i, q in enumerate(sa.states)}
        doc["initial"] = [name[q] for q in sorted(x.initial, key=order.__getitem__)]
        doc["final"] = [name[q] for q in sorted(x.final, key=order.__getitem__)]
    return doc


def from_dict(doc: Mapping):
    """Inverse of :func:`to_dict`; returns an FSA when ``initial`` is present."""
    try:
        trans = {(t["from"], t["label"]): t["to"] for t in doc["transitions"]}
        sa = Semiautomaton(tuple(doc["states"]), tuple(doc["alphabet"]), trans)
    except (KeyError, TypeError) as exc:
        raise AutomatonError(f"malformed automaton document: {exc}") from exc
    if len(trans) != len(doc["transitions"]):
        raise AutomatonError("nondeterministic transition list")
    if "initial" not in doc and "final" not in doc:
        return sa
    return FSA(sa, doc.get("initial", ()), doc.get("final", ()))


def dumps(x) -> str:
    return json.dumps(to_dict(x), indent=2, ensure_ascii=False) + "\n"


def loads(text: str):
    return from_dict(json.loads(text))


def words(alphabet: Iterable[Symbol], max_len: int):
    """All words up to ``max_len`` in length-lexicographic order."""
    alphabet = tuple(alphabet)
    frontier = [()]
    yield ()
    for _ in range(max_len):
        frontier = [w + (a,) for w in frontier for a in alphabet]
        yield from frontier
