"""Strictly k-local languages and their string-extension learner.

Words are tuples of symbols (a plain ``str`` also works when every symbol is
one character).  The boundary markers ``LEFT`` and ``RIGHT`` never belong to
an alphabet; a factor is a tuple that may start with ``LEFT`` and/or end
with ``RIGHT``.

The learner's grammar is the union of the k-factors of every word it has
seen; a pause item leaves it untouched.  ``grammar_to_fsa`` prunes the
k-local scaffold ``D_k`` (one state per word of length < k, remembering the
last k-1 symbols) down to the transitions and final states the grammar
licenses.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .automata import FSA, AutomatonError, language_equivalent, levels, make_fsa, minimize, trim

LEFT = "⋊"  # ⋊
RIGHT = "⋉"  # ⋉
ASCII_LEFT, ASCII_RIGHT = "<", ">"


class _Pause:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "#"


PAUSE = _Pause()


class UnknownSymbolError(ValueError):
    pass


def _check_alphabet(sigma) -> tuple:
    sigma = tuple(dict.fromkeys(sigma))
    for a in sigma:
        if a in (LEFT, RIGHT, ASCII_LEFT, ASCII_RIGHT) or not a:
            raise ValueError(f"reserved or empty symbol {a!r} in alphabet")
    return sigma


def k_factors(w: Sequence[str], k: int, with_boundaries: bool = True) -> frozenset:
    if k < 1:
        raise ValueError("k must be at least 1")
    w = tuple(w)
    if with_boundaries:
        w = (LEFT,) + w + (RIGHT,)
    if len(w) <= k:
        return frozenset([w])
    return frozenset(w[i : i + k] for i in range(len(w) - k + 1))


@dataclass(frozen=True)
class SLGrammar:
    k: int
    sigma: tuple
    factors: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        sigma = _check_alphabet(self.sigma)
        object.__setattr__(self, "sigma", sigma)
        factors = frozenset(tuple(f) for f in self.factors)
        symbols = set(sigma)
        for f in factors:
            if not f or len(f) > self.k:
                raise ValueError(f"factor {f!r} longer than k={self.k}")
            inner = f[1 if f[0] == LEFT else 0 : len(f) - 1 if f[-1] == RIGHT else len(f)]
            if not set(inner) <= symbols:
                raise ValueError(f"factor {f!r} uses symbols outside the alphabet")
            if len(f) < self.k and not (f[0] == LEFT and f[-1] == RIGHT):
                raise ValueError(f"short factor {f!r} must cover a whole word")
        object.__setattr__(self, "factors", factors)

    def sort_key(self, factor):
        rank = {a: i for i, a in enumerate(self.sigma)}
        rank[LEFT], rank[RIGHT] = -1, len(self.sigma)
        return (len(factor), [rank[s] for s in factor])

    def sorted_factors(self) -> list:
        return sorted(self.factors, key=self.sort_key)


def sl_membership(g: SLGrammar, w: Sequence[str]) -> bool:
    return k_factors(w, g.k) <= g.factors


@dataclass(frozen=True)
class LearnerState:
    grammar: SLGrammar
    items_consumed: int = 0


def new_learner(sigma, k: int) -> LearnerState:
    return LearnerState(SLGrammar(k, tuple(sigma)))


def learner_update(st: LearnerState, item) -> LearnerState:
    if item is PAUSE:
        return replace(st, items_consumed=st.items_consumed + 1)
    g = st.grammar
    w = tuple(item)
    unknown = set(w) - set(g.sigma)
    if unknown:
        raise UnknownSymbolError(f"unknown adversary action {sorted(unknown)[0]!r}")
    grammar = replace(g, factors=g.factors | k_factors(w, g.k))
    return LearnerState(grammar, st.items_consumed + 1)


def learn(sigma, k: int, presentation: Iterable) -> LearnerState:
    st = new_learner(sigma, k)
    for item in presentation:
        st = learner_update(st, item)
    return st


# -- the D_k scaffold -------------------------------------------------------
#
# A scaffold state u (|u| <= k-1) corresponds to the "window" of the last
# k-1 symbols of LEFT+w: while |u| < k-1 the window still carries LEFT.


def _window(u: tuple, k: int) -> tuple:
    return (LEFT,) + u if len(u) < k - 1 else u


def _advance(window: tuple, a: str, k: int):
    """Return ``(factor_or_None, next_window)`` for reading ``a``."""
    s = window + (a,)
    if len(s) == k:
        return s, (s[1:] if k > 1 else ())
    return None, s


def _state_of(window: tuple) -> tuple:
    return window[1:] if window and window[0] == LEFT else window


def build_dk(sigma, k: int) -> FSA:
    """The k-local acceptor of Sigma*: states are all words shorter than k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    sigma = _check_alphabet(sigma)
    states = [()]
    frontier = [()]
    for _ in range(k - 1):
        frontier = [u + (a,) for u in frontier for a in sigma]
        states.extend(frontier)
    trans = {}
    for u in states:
        for a in sigma:
            ua = u + (a,)
            trans[(u, a)] = ua[len(ua) - (k - 1) :] if len(ua) >= k - 1 else ua
    return make_fsa(states, sigma, trans, [()], states)


def grammar_to_fsa(g: SLGrammar) -> FSA:
    """Prune ``D_k`` to the SL_k acceptor of ``L(g)``.

    Only the part of ``D_k`` reachable through licensed factors is built,
    then trimmed.  The initial state ``()`` is always kept (an empty grammar
    yields a lone non-final state).
    """
    k = g.k
    if k == 1 and (LEFT,) not in g.factors:
        return make_fsa([()], g.sigma, {}, [()], [])
    states = {(): None}
    queue = deque([()])
    trans = {}
    final = set()
    while queue:
        u = queue.popleft()
        w = _window(u, k)
        for a in g.sigma:
            factor, nxt = _advance(w, a, k)
            if factor is None or factor in g.factors:
                v = _state_of(nxt)
                trans[(u, a)] = v
                if v not in states:
                    states[v] = None
                    queue.append(v)
        if w + (RIGHT,) in g.factors:
            final.add(u)
    order = {u: i for i, u in enumerate(_dk_order(g.sigma, states))}
    pruned = trim(make_fsa(sorted(states, key=order.__getitem__), g.sigma, trans, [()], final))
    if () not in pruned.states:
        return make_fsa([()], g.sigma, {}, [()], [])
    return pruned


def _dk_order(sigma, states):
    """Sort scaffold states the way ``build_dk`` lists them: by length, then
    by alphabet order."""
    rank = {a: i for i, a in enumerate(sigma)}
    return sorted(states, key=lambda u: (len(u), [rank[a] for a in u]))


def factor_grammar(fsa: FSA, k: int) -> SLGrammar:
    """All boundary-marked k-factors that occur in words of ``L(fsa)``."""
    dfa = trim(fsa)
    sigma = dfa.alphabet
    if len(dfa.initial) != 1:
        if dfa.initial:
            raise AutomatonError("factor extraction needs a deterministic acceptor")
        return SLGrammar(k, sigma)
    q0 = next(iter(dfa.initial))
    start = (q0, _window((), k))
    seen = {start}
    queue = deque([start])
    factors = {(LEFT,)} if k == 1 else set()
    while queue:
        q, w = queue.popleft()
        if q in dfa.final:
            factors.add(w + (RIGHT,))
        for a in sigma:
            dst = dfa.transitions.get((q, a))
            if dst is None:
                continue
            factor, nxt = _advance(w, a, k)
            if factor is not None:
                factors.add(factor)
            if (dst, nxt) not in seen:
                seen.add((dst, nxt))
                queue.append((dst, nxt))
    return SLGrammar(k, sigma, factors)


def level_bound(canonical: FSA) -> int:
    """Deepest final state of a canonical acceptor plus one."""
    depth = levels(canonical)
    return max((depth[q] for q in canonical.final), default=0) + 1


def pair_bound(canonical: FSA) -> Optional[int]:
    """Largest k for which a canonical acceptor can still need SL_k.

    L is SL_k iff any two states reading the same word of length k-1 end
    in the same state.  A word that keeps two states apart walks through
    distinct pairs, so the longest such walk bounds k; a cycle among
    distinct pairs means no k works and None is returned.
    """
    states = canonical.states
    if len(states) <= 1:
        return 1
    trans = canonical.transitions
    nodes = [frozenset(pq) for pq in itertools.combinations(states, 2)]
    succ = {}
    indeg = dict.fromkeys(nodes, 0)
    for node in nodes:
        p, q = tuple(node)
        out = []
        for a in canonical.alphabet:
            p2, q2 = trans.get((p, a)), trans.get((q, a))
            if p2 is not None and q2 is not None and p2 != q2:
                out.append(frozenset((p2, q2)))
        succ[node] = out
        for m in out:
            indeg[m] += 1
    # longest path by peeling sources; leftovers sit on a cycle
    longest = dict.fromkeys(nodes, 0)
    queue = deque(n for n in nodes if indeg[n] == 0)
    done = 0
    while queue:
        node = queue.popleft()
        done += 1
        for m in succ[node]:
            longest[m] = max(longest[m], longest[node] + 1)
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    if done < len(nodes):
        return None
    return max(longest.values()) + 2


def is_strictly_local(fsa: FSA) -> Optional[int]:
    """Smallest k with ``L(fsa)`` in SL_k, or ``None`` if there is none.

    Candidates k = 1, 2, ... are tested by extracting the k-factors of the
    language and comparing languages.  The search stops at
    :func:`pair_bound`; SL_k is contained in SL_{k+1}, so failing every
    candidate up to it means the language is not strictly local.  The
    empty language is reported as SL_1 (the empty 1-grammar).
    """
    canonical = minimize(fsa)
    if not canonical.final:
        return 1
    k_max = pair_bound(canonical)
    if k_max is None:
        return None
    for k in range(1, k_max + 1):
        if language_equivalent(grammar_to_fsa(factor_grammar(canonical, k)), canonical):
            return k
    return None


def useful_factors(g: SLGrammar) -> frozenset:
    return factor_grammar(grammar_to_fsa(g), g.k).factors


def characteristic_sample(g: SLGrammar) -> tuple:
    """A finite subset of ``L(g)`` whose factors are all useful factors of g.

    For each useful factor the shortest witness is prefix + symbol + suffix
    where prefix and suffix are breadth-first shortest paths (ties follow
    the alphabet order).  Factors that can never occur in an accepted word
    are left out; see :func:`useful_factors`.
    """
    fsa = grammar_to_fsa(g)
    if not fsa.final:
        return ()
    k, sigma = g.k, g.sigma
    prefix = {(): ()}
    queue = deque([()])
    while queue:
        u = queue.popleft()
        for a in sigma:
            v = fsa.transitions.get((u, a))
            if v is not None and v not in prefix:
                prefix[v] = prefix[u] + (a,)
                queue.append(v)
    preds = {}
    for u, a, v in fsa.core.edges():
        preds.setdefault(v, []).append((u, a))
    order = {q: i for i, q in enumerate(fsa.states)}
    suffix = {}
    queue = deque()
    for q in sorted(fsa.final, key=order.__getitem__):
        suffix[q] = ()
        queue.append(q)
    while queue:
        v = queue.popleft()
        for u, a in preds.get(v, ()):
            if u not in suffix:
                suffix[u] = (a,) + suffix[v]
                queue.append(u)

    sample = set()
    for u in fsa.states:
        w = _window(u, k)
        if u in fsa.final:
            sample.add(prefix[u])
        for a in sigma:
            v = fsa.transitions.get((u, a))
            if v is None:
                continue
            factor, _ = _advance(w, a, k)
            if factor is not None:
                sample.add(prefix[u] + (a,) + suffix[v])
    rank = {a: i for i, a in enumerate(sigma)}
    return tuple(sorted(sample, key=lambda w: (len(w), [rank[s] for s in w])))


# -- serialization ----------------------------------------------------------


def _single_char(sigma) -> bool:
    return all(len(a) == 1 for a in sigma)


def render_factor(factor: tuple, sigma) -> str:
    """ASCII form of a factor: ``<`` and ``>`` stand for the markers.

    With single-character symbols the parts are concatenated (``<aa``);
    otherwise they are separated by spaces (``< ad af``).
    """
    parts = [ASCII_LEFT if s == LEFT else ASCII_RIGHT if s == RIGHT else s for s in factor]
    return "".join(parts) if _single_char(sigma) else " ".join(parts)


def parse_factor(text: str, sigma) -> tuple:
    parts = list(text) if _single_char(sigma) else text.split()
    return tuple(LEFT if p == ASCII_LEFT else RIGHT if p == ASCII_RIGHT else p for p in parts)


def parse_word(text: str, sigma=None) -> tuple:
    text = text.strip()
    if " " in text or (sigma is not None and not _single_char(sigma)):
        return tuple(text.split())
    return tuple(text)


def grammar_to_dict(g: SLGrammar) -> dict:
    return {
        "k": g.k,
        "alphabet": list(g.sigma),
        "factors": [render_factor(f, g.sigma) for f in g.sorted_factors()],
    }


def grammar_from_dict(doc) -> SLGrammar:
    sigma = tuple(doc["alphabet"])
    return SLGrammar(int(doc["k"]), sigma, {parse_factor(f, sigma) for f in doc["factors"]})


def dump_grammar(g: SLGrammar) -> str:
    return json.dumps(grammar_to_dict(g), indent=2) + "\n"


def load_grammar(text: str) -> SLGrammar:
    return grammar_from_dict(json.loads(text))


def read_corpus(lines: Iterable[str], sigma=None) -> list:
    """Parse a presentation: one word per line, ``#`` marks a pause.

    A blank line is the empty word.  Symbols are single characters unless
    the line contains spaces or the alphabet has multi-character symbols.
    """
    items = []
    for line in lines:
        line = line.rstrip("\n")
        items.append(PAUSE if line.strip() == "#" else parse_word(line, sigma))
    return items
