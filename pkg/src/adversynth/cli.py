"""Command-line entry points: ``adversynth`` and ``slinfer``.

Exit codes: 0 success, 1 negative answer (not SL, word rejected, no weak
simulation), 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import adaptive, automata, casestudy, inference, weaksim
from .game import (
    GameError,
    attractor,
    dump_game,
    export_game_dot,
    load_game,
    optimal_strategy,
    winning_initials,
)

log = logging.getLogger("adversynth")


class CliError(Exception):
    pass


def _write_atomic(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out=None):
    if out:
        _write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc


# -- solve ------------------------------------------------------------------


def solve_report(g) -> str:
    attr = attractor(g)
    wins = winning_initials(g, attr)
    strategy = optimal_strategy(g, attr)
    order = {q: i for i, q in enumerate(g.states)}
    out = io.StringIO()
    out.write(
        f"game: {len(g.states)} states, {g.transition_count()} enabled transitions, "
        f"{len(g.initial)} initial, {len(g.final)} final\n"
    )
    if wins:
        pct = 100.0 * len(wins) / len(g.initial)
        out.write(f"winning initial states: {len(wins)}/{len(g.initial)} ({pct:.1f}%)\n")
        for q in sorted(wins, key=order.__getitem__):
            out.write(f"  {q}  rank {attr.rank[q]}\n")
    else:
        out.write("no winning initial states\n")
    out.write(f"attractor: {len(attr.rank)} states in {len(attr.layers)} layers\n")
    out.write("ranks:\n")
    for q in sorted(attr.rank, key=lambda q: (attr.rank[q], order[q])):
        out.write(f"  {attr.rank[q]:>3}  {q}\n")
    out.write("strategy:\n")
    for q in sorted(strategy.table, key=lambda q: (attr.rank[q], order[q])):
        out.write(f"  {q} -> {','.join(strategy.moves(q))}\n")
    return out.getvalue()


def cmd_solve(args) -> int:
    try:
        g = load_game(_read(args.game))
    except GameError as exc:
        raise CliError(str(exc)) from exc
    if args.dot:
        _emit(export_game_dot(g, attractor(g)), args.out)
    else:
        _emit(solve_report(g), args.out)
    return 0


# -- casestudy --------------------------------------------------------------


def cmd_casestudy(args) -> int:
    g = casestudy.build_scenario(args.regime)
    emit = {"game.json": "json"}.get(args.emit, args.emit)
    if emit == "json":
        text = dump_game(g)
    elif emit == "dot":
        text = export_game_dot(g, attractor(g))
    else:
        attr = attractor(g)
        order = {q: i for i, q in enumerate(g.states)}
        wins = sorted(winning_initials(g, attr), key=order.__getitem__)
        text = "".join(f"{q}\n" for q in wins) or "no winning initial states\n"
    _emit(text, args.out)
    return 0


# -- play -------------------------------------------------------------------


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ADVERSYNTH_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"ADVERSYNTH_SEED must be an integer, got {env!r}") from None


def _replicate(config: adaptive.ExperimentConfig):
    metrics, traces = adaptive.run_repeated(config)
    rows = list(adaptive.csv_rows(config, traces))
    rows.append(
        {
            "game_id": "summary",
            "seed": config.seed,
            "initial_state": "",
            "outcome": f"wins={metrics.wins}/{metrics.games_played}",
            "agent_turns": sum(t.agent_turns for t in traces),
            "adversary_turns": sum(t.adversary_turns for t in traces),
            "cumulative_turns": metrics.turns_total,
            "discovery_ratio": f"{metrics.discovery_ratio:.6f}",
        }
    )
    return rows, [t.to_dict() for t in traces]


def cmd_play(args) -> int:
    seed = _seed(args)
    try:
        configs = [
            adaptive.ExperimentConfig(
                regime=args.regime,
                agent=args.agent,
                adversary=args.adversary,
                seed=seed + r,
                games=args.games,
                max_total_turns=args.max_turns,
                max_game_turns=args.max_game_turns,
                random_agent_ties=args.random_ties,
                frozen_belief=not args.replan,
            )
            for r in range(args.replications)
        ]
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_replicate, configs))
    else:
        results = [_replicate(c) for c in configs]

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=adaptive.CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rows, _ in results:
        writer.writerows(rows)
    if args.traces:
        doc = [{"seed": c.seed, "games": traces} for c, (_, traces) in zip(configs, results)]
        _write_atomic(args.traces, json.dumps(doc, indent=1) + "\n")
    _emit(buf.getvalue(), args.csv)
    return 0


# -- inference --------------------------------------------------------------


def cmd_learn(args) -> int:
    sigma = tuple(s for s in args.alphabet.split(",") if s) if args.alphabet else None
    items = inference.read_corpus(_read(args.corpus).splitlines(), sigma)
    if sigma is None:
        seen = {}
        for item in items:
            if item is not inference.PAUSE:
                for a in item:
                    seen.setdefault(a, None)
        sigma = tuple(sorted(seen))
    try:
        st = inference.learn(sigma, args.k, items)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _emit(inference.dump_grammar(st.grammar), args.out)
    return 0


def cmd_member(args) -> int:
    try:
        g = inference.load_grammar(_read(args.grammar))
    except (ValueError, KeyError) as exc:
        raise CliError(f"malformed grammar: {exc}") from exc
    word = inference.parse_word(args.word, g.sigma)
    unknown = set(word) - set(g.sigma)
    if unknown:
        raise CliError(f"symbol {sorted(unknown)[0]!r} not in the grammar alphabet")
    ok = inference.sl_membership(g, word)
    print("accept" if ok else "reject")
    return 0 if ok else 1


def _load_fsa(path):
    try:
        m = automata.loads(_read(path))
    except (ValueError, KeyError) as exc:
        raise CliError(f"malformed automaton {path}: {exc}") from exc
    return m


def cmd_decide_sl(args) -> int:
    m = _load_fsa(args.machine)
    if not isinstance(m, automata.FSA):
        raise CliError("decide-sl needs an acceptor with initial and final states")
    try:
        canonical = automata.minimize(m)
    except automata.AutomatonError as exc:
        raise CliError(str(exc)) from exc
    bound = inference.level_bound(canonical)
    k = inference.is_strictly_local(m)
    if k is None:
        print("not SL")
        return 1
    if k <= bound:
        print(f"SL, k ≤ {bound} (smallest k = {k})")
    else:
        print(f"SL, smallest k = {k} (above the level bound {bound})")
    return 0


def cmd_weaksim(args) -> int:
    left, right = _load_fsa(args.left), _load_fsa(args.right)
    silent = [s for s in (args.silent or "").split(",") if s]
    try:
        split = weaksim.SilentSplit.of(automata._core(left), silent)
        rel = weaksim.largest_weak_simulation(left, right, split, closure=args.closure)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if rel is None:
        print("none")
        return 1
    for p, q in sorted(rel, key=lambda pq: (str(pq[0]), str(pq[1]))):
        print(f"{p} {q}")
    return 0


# -- parsers ----------------------------------------------------------------


def _add_inference_commands(sub):
    p = sub.add_parser("learn", help="learn an SL_k grammar from a corpus (one word per line, # = pause)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alphabet", help="comma-separated alphabet (default: symbols seen in the corpus)")
    p.add_argument("--out", help="write the grammar here instead of stdout")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("member", help="test a word against a grammar")
    p.add_argument("--grammar", required=True)
    p.add_argument("word", nargs="?", default="")
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("decide-sl", help="decide whether an acceptor's language is strictly local")
    p.add_argument("machine")
    p.set_defaults(func=cmd_decide_sl)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adversynth", description="game solving, adaptive play and strictly local inference")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a game file")
    p.add_argument("--game", required=True)
    p.add_argument("--dot", action="store_true", help="emit the attractor-annotated graph instead")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("play", help="run repeated games and write a CSV")
    p.add_argument("--regime", default="opposite", choices=sorted(casestudy.REGIMES))
    p.add_argument("--agent", default="learning", choices=[k.value for k in adaptive.AgentKind])
    p.add_argument("--adversary", default="optimal", choices=[k.value for k in adaptive.AdversaryKind])
    p.add_argument("--games", type=int, default=300)
    p.add_argument("--seed", type=int, help="default: $ADVERSYNTH_SEED or 0")
    p.add_argument("--max-turns", type=int, help="stop once this many turns were played in total")
    p.add_argument("--max-game-turns", type=int, default=100)
    p.add_argument("--random-ties", action="store_true", help="draw the agent's tied moves at random")
    p.add_argument("--replan", action="store_true", help="no-learning agent replans from observed doors")
    p.add_argument("--replications", type=int, default=1, help="run seeds seed..seed+R-1")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="CSV output path (default stdout)")
    p.add_argument("--traces", help="write per-game JSON traces to this file")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("casestudy", help="build the apartment game")
    p.add_argument("--regime", default="opposite", choices=sorted(casestudy.REGIMES))
    p.add_argument("--emit", default="winning-set", choices=["json", "game.json", "dot", "winning-set"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_casestudy)

    _add_inference_commands(sub)

    p = sub.add_parser("weaksim", help="largest weak simulation of LEFT by RIGHT")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--silent", default="", help="comma-separated silent labels")
    p.add_argument("--closure", action="store_true", help="allow silent steps before and after")
    p.set_defaults(func=cmd_weaksim)
    return parser


def build_slinfer_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slinfer", description="strictly local grammar inference")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_inference_commands(sub)
    return parser


def _run(parser, argv) -> int:
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return _run(build_parser(), argv)


def slinfer_main(argv=None) -> int:
    return _run(build_slinfer_parser(), argv)


if __name__ == "__main__":
    sys.exit(main())
