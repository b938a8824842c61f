"""Command-line entry points.

Subcommands: rewrite, simulate, koch, replay, verify, prune, serve.
Exit codes: 1 grammar parse error, 2 I/O error, 3 comment/share before
any post, 4 koch depth out of range, 5 broken hash chain.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import eventlog
from .eventlog import EventLog, ReplayError, verify_chain
from .layout import LayoutConfig, layout
from .lsystem import GrammarError, SymbolString, parse_grammar, rewrite
from .server import ApiSession, create_app
from .tree import RANDOM, NoPostsError, new_tree
from .turtle import SvgStyle, TurtleConfig, emit_svg, koch_quadratic

EXIT_PARSE = 1
EXIT_IO = 2
EXIT_NO_POSTS = 3
EXIT_KOCH_RANGE = 4
EXIT_CHAIN = 5

KOCH_MAX = 8

SCRIPT_EVENTS = {
    "P": ("AddPost", {}),
    "F": ("AddFriend", {}),
    "C": ("AddComment", {"post": RANDOM}),
    "S": ("AddShare", {"post": RANDOM}),
    "L": ("LikeAll", {}),
    "V": ("ViewAll", {}),
    # R handled specially (threshold)
}


def _say(args, message):
    if not args.quiet:
        print(message)


def _write_text(path, text):
    if path == "-" or path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def cmd_rewrite(args) -> int:
    try:
        with open(args.grammar, encoding="utf-8") as f:
            source = f.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    try:
        grammar = parse_grammar(source)
        result = rewrite(grammar, grammar.axiom, args.iterations, seed=args.seed)
    except (GrammarError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        _write_text(args.output, str(result) + "\n")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return 0


def run_script(script: str, seed: int, threshold: int = 50,
               log: EventLog | None = None, actor: str = "user"):
    """Apply a key script (e.g. "PPFCSLVR") to a fresh tree.

    Returns (tree, pruned id lists per R).  Raises NoPostsError when C/S
    occurs before any post, ValueError on unknown letters.
    """
    tree = new_tree(actor, seed)
    pruned: list[list[int]] = []
    for i, key in enumerate(script.upper()):
        if key in SCRIPT_EVENTS:
            type, base_args = SCRIPT_EVENTS[key]
            event_args = dict(base_args)
        elif key == "R":
            type, event_args = "Prune", {"threshold": threshold}
        else:
            raise ValueError(f"unknown script letter {key!r} at position {i}")
        if log is not None:
            log.append(actor, type, event_args)
        result = eventlog.apply_event(tree, type, event_args, actor)
        if key == "R":
            pruned.append(result["prunedIds"])
    return tree, pruned


def cmd_simulate(args) -> int:
    log = None
    if args.log_path:
        try:
            log = EventLog(args.log_path)
        except (OSError, eventlog.LogError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
    try:
        tree, pruned = run_script(args.script, args.seed, args.threshold, log)
    except NoPostsError:
        print("error: comment/share before any post", file=sys.stderr)
        return EXIT_NO_POSTS
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.svg:
        geo = layout(tree, LayoutConfig())
        try:
            _write_text(args.svg, emit_svg(geo, SvgStyle()))
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
    out = dict(tree.status())
    if pruned:
        out["pruned"] = pruned
    _say(args, json.dumps(out))
    return 0


def cmd_koch(args) -> int:
    if not 0 <= args.iterations <= KOCH_MAX:
        print(f"error: koch depth must be in 0..{KOCH_MAX}", file=sys.stderr)
        return EXIT_KOCH_RANGE
    geo = koch_quadratic(args.iterations, TurtleConfig(start_heading=0.0))
    try:
        _write_text(args.svg, emit_svg(geo, SvgStyle()))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    _say(args, f"segments: {len(geo.segments)}")
    return 0


def _load_log(path: str):
    with open(path, "rb") as f:
        return f.read()


def cmd_verify(args) -> int:
    try:
        data = _load_log(args.log_path)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    bad = verify_chain(data)
    if bad is None:
        _say(args, "ok")
        return 0
    print(f"chain broken at seq {bad}", file=sys.stderr)
    return EXIT_CHAIN


def cmd_replay(args) -> int:
    try:
        data = _load_log(args.log_path)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    bad = verify_chain(data)
    if bad is not None:
        print(f"chain broken at seq {bad}", file=sys.stderr)
        return EXIT_CHAIN
    records = eventlog.parse_records(data)
    try:
        tree = eventlog.replay(records, args.seed)
    except ReplayError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHAIN
    if args.svg:
        try:
            _write_text(args.svg, emit_svg(layout(tree, LayoutConfig()), SvgStyle()))
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_IO
    _say(args, json.dumps(tree.status()))
    return 0


def cmd_prune(args) -> int:
    try:
        log = EventLog(args.log_path)
    except (OSError, eventlog.LogError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHAIN if isinstance(e, eventlog.LogError) else EXIT_IO
    try:
        tree = eventlog.replay(log.records, args.seed)
    except ReplayError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHAIN
    log.append(args.actor, "Prune", {"threshold": args.threshold})
    removed = tree.prune(args.threshold)
    _say(args, json.dumps({"prunedIds": removed, "status": tree.status()}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    log_path = os.environ.get("LTREE_LOG", args.log_path)
    session = ApiSession(seed=args.seed, log_path=log_path)
    app = create_app(session)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ltree", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="random stream seed")
    p.add_argument("--quiet", action="store_true", help="suppress normal output")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("rewrite", help="apply L-system rewriting to a grammar's axiom")
    sp.add_argument("grammar", help="grammar file")
    sp.add_argument("-n", "--iterations", type=int, default=1)
    sp.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    sp.set_defaults(func=cmd_rewrite)

    sp = sub.add_parser("simulate", help="run a key script (letters PFCSLVR)")
    sp.add_argument("script")
    sp.add_argument("--threshold", type=int, default=50)
    sp.add_argument("--svg", default=None, help="write the final tree as SVG")
    sp.add_argument("--log-path", default=None, help="append events to this log file")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("koch", help="render the quadratic Koch validation curve")
    sp.add_argument("-n", "--iterations", type=int, default=3)
    sp.add_argument("--svg", default="-", help="output SVG file (default stdout)")
    sp.set_defaults(func=cmd_koch)

    sp = sub.add_parser("replay", help="rebuild the tree from an event log")
    sp.add_argument("log_path")
    sp.add_argument("--svg", default=None)
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("verify", help="check the log's hash chain")
    sp.add_argument("log_path")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("prune", help="append a Prune event to a log")
    sp.add_argument("log_path")
    sp.add_argument("--threshold", type=int, default=50)
    sp.add_argument("--actor", default="user")
    sp.set_defaults(func=cmd_prune)

    sp = sub.add_parser("serve", help="serve the HTTP API and web UI")
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--log-path", default=None)
    sp.add_argument("--snapshot-path", default=None)
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
