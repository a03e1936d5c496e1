"""Two-player reachability games where the agent learns the adversary's
rules as a strictly local language while playing."""
from .automata import FSA, Semiautomaton, language_equivalent, make_fsa, minimize
from .game import (
    EPSILON,
    GameAutomaton,
    GameState,
    attractor,
    game_automaton,
    optimal_strategy,
    turn_based_product,
    winning_initials,
)
from .inference import SLGrammar, characteristic_sample, grammar_to_fsa, is_strictly_local, learn
from .weaksim import SilentSplit, largest_weak_simulation

__version__ = "0.1.0"

__all__ = [
    "EPSILON",
    "FSA",
    "GameAutomaton",
    "GameState",
    "SLGrammar",
    "Semiautomaton",
    "SilentSplit",
    "attractor",
    "characteristic_sample",
    "game_automaton",
    "grammar_to_fsa",
    "is_strictly_local",
    "language_equivalent",
    "largest_weak_simulation",
    "learn",
    "make_fsa",
    "minimize",
    "optimal_strategy",
    "turn_based_product",
    "winning_initials",
]
