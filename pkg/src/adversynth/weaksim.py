"""Weak (observable) simulation between labeled semiautomata.

Labels split into observable and silent ones.  A composite step on an
observable symbol is, by default, at most one silent step followed by that
symbol; ``closure=True`` switches to the general reading of any number of
silent steps before and after it.  Silent steps of the simulated side are
matched by zero or more silent steps of the simulating side.
"""
from __future__ import annotations

from dataclasses import dataclass

from .automata import Semiautomaton


@dataclass(frozen=True)
class SilentSplit:
    alphabet: tuple
    silent: frozenset

    def __post_init__(self):
        object.__setattr__(self, "silent", frozenset(self.silent))
        if not self.silent <= set(self.alphabet):
            raise ValueError("silent labels must belong to the alphabet")

    @property
    def observable(self) -> tuple:
        return tuple(a for a in self.alphabet if a not in self.silent)

    @classmethod
    def of(cls, sa: Semiautomaton, silent) -> "SilentSplit":
        return cls(sa.alphabet, frozenset(silent))


def _core(x):
    return getattr(x, "core", x)


def silent_closure(sa, split: SilentSplit, q) -> set:
    sa = _core(sa)
    seen = {q}
    stack = [q]
    while stack:
        p = stack.pop()
        for t in split.silent:
            r = sa.transitions.get((p, t))
            if r is not None and r not in seen:
                seen.add(r)
                stack.append(r)
    return seen


def composite_successors(sa, split: SilentSplit, q, sigma, closure: bool = False) -> frozenset:
    if sigma in split.silent:
        raise ValueError("composite steps are labeled with observable symbols")
    sa = _core(sa)
    if closure:
        before = silent_closure(sa, split, q)
    else:
        before = {q} | {r for t in split.silent if (r := sa.transitions.get((q, t))) is not None}
    mids = {r for p in before if (r := sa.transitions.get((p, sigma))) is not None}
    if not closure:
        return frozenset(mids)
    out = set()
    for m in mids:
        out |= silent_closure(sa, split, m)
    return frozenset(out)


def _steps(sa, split, q, closure):
    """``(label, targets)`` pairs the left side must be able to match."""
    sa = _core(sa)
    for sigma in split.observable:
        targets = composite_successors(sa, split, q, sigma, closure)
        if targets:
            yield sigma, targets
    for t in split.silent:
        r = sa.transitions.get((q, t))
        if r is not None:
            yield t, frozenset([r])


def _answers(sa, split, q, label, closure):
    if label in split.silent:
        return silent_closure(sa, split, q)
    return composite_successors(sa, split, q, label, closure)


def is_weak_simulation(relation, a1, a2, split: SilentSplit, closure: bool = False) -> bool:
    """True iff ``relation`` is total on ``a1`` and lets ``a2`` match every step."""
    a1, a2 = _core(a1), _core(a2)
    relation = set(relation)
    related = {p for p, _ in relation}
    if not set(a1.states) <= related:
        return False
    for p, q in relation:
        for label, targets in _steps(a1, split, p, closure):
            answers = _answers(a2, split, q, label, closure)
            for p2 in targets:
                if not any((p2, q2) in relation for q2 in answers):
                    return False
    return True


def largest_weak_simulation(a1, a2, split: SilentSplit, closure: bool = False):
    """Greatest relation satisfying the matching clause, or None if not total."""
    a1, a2 = _core(a1), _core(a2)
    if set(a1.alphabet) != set(a2.alphabet):
        raise ValueError("both systems need the same alphabet")
    steps = {p: list(_steps(a1, split, p, closure)) for p in a1.states}
    answers = {}
    for q in a2.states:
        for label in a1.alphabet:
            answers[(q, label)] = _answers(a2, split, q, label, closure)
    relation = {(p, q) for p in a1.states for q in a2.states}
    changed = True
    while changed:
        changed = False
        for p, q in sorted(relation, key=repr):
            ok = all(
                any((p2, q2) in relation for q2 in answers[(q, label)])
                for label, targets in steps[p]
                for p2 in targets
            )
            if not ok:
                relation.discard((p, q))
                changed = True
    if not set(a1.states) <= {p for p, _ in relation}:
        return None
    return frozenset(relation)


def check_alternation(sa, split: SilentSplit, initial=None) -> bool:
    """True iff no reachable path takes two silent steps in a row."""
    sa = _core(sa)
    start = set(sa.states) if initial is None else set(initial)
    seen = set(start)
    stack = list(start)
    while stack:
        p = stack.pop()
        for a in sa.alphabet:
            r = sa.transitions.get((p, a))
            if r is None:
                continue
            if a in split.silent and any((r, t) in sa.transitions for t in split.silent):
                return False
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return True


def compose(r12, r23) -> frozenset:
    by_mid = {}
    for q, s in r23:
        by_mid.setdefault(q, set()).add(s)
    return frozenset((p, s) for p, q in r12 for s in by_mid.get(q, ()))
