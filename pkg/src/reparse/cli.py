"""Command-line front end.

    reparse match <pattern> <string>
    reparse parse <pattern> [<string>] [--engine E] [--t INT]
                  [--gamma-n INT] [--gamma-m INT] [--input-file PATH] [--json]
    reparse bench --engines LIST --n LIST --m LIST --seeds INT
                  [--t INT] [--out PATH]

Output is compact JSON on stdout; diagnostics go to stderr.  Exit status:
0 match, 1 no match, 2 usage or pattern error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import ENGINES, EngineConfig, match, parse
from .syntax import PatternSyntaxError

EXIT_MATCH = 0
EXIT_NO_MATCH = 1
EXIT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="reparse", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p_match = sub.add_parser("match", help="test membership only")
    p_match.add_argument("pattern")
    p_match.add_argument("string")

    p_parse = sub.add_parser("parse", help="extract the full parse")
    p_parse.add_argument("pattern")
    p_parse.add_argument("string", nargs="?")
    p_parse.add_argument("--engine", choices=ENGINES, default="linear")
    p_parse.add_argument("--t", type=int, default=None,
                         help="micro-automaton size for the bitparallel engine")
    p_parse.add_argument("--gamma-n", type=int, default=None)
    p_parse.add_argument("--gamma-m", type=int, default=None)
    p_parse.add_argument("--input-file", default=None,
                         help="read the subject string (verbatim bytes) from a file")
    p_parse.add_argument("--json", action="store_true",
                         help="accepted for compatibility; output is always JSON")

    p_bench = sub.add_parser("bench", help="emit benchmark records as JSON lines")
    p_bench.add_argument("--engines", required=True,
                         help="comma-separated engine names")
    p_bench.add_argument("--n", required=True,
                         help="comma-separated subject lengths")
    p_bench.add_argument("--m", required=True,
                         help="comma-separated pattern literal counts")
    p_bench.add_argument("--seeds", type=int, required=True)
    p_bench.add_argument("--t", type=int, default=None)
    p_bench.add_argument("--out", default=None)
    return top


def _subject_bytes(args) -> bytes:
    if getattr(args, "input_file", None):
        with open(args.input_file, "rb") as fh:
            return fh.read()
    if args.string is None:
        raise SystemExit("reparse: a subject string or --input-file is required")
    return os.fsencode(args.string)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_MATCH

    try:
        if args.command == "match":
            ok = match(os.fsencode(args.pattern), os.fsencode(args.string))
            _emit({"match": ok})
            return EXIT_MATCH if ok else EXIT_NO_MATCH

        if args.command == "parse":
            text = _subject_bytes(args)
            config = None
            if args.gamma_n is not None or args.gamma_m is not None:
                config = EngineConfig(
                    gamma_n=args.gamma_n if args.gamma_n is not None else 2,
                    gamma_m=args.gamma_m if args.gamma_m is not None else 25,
                )
            result = parse(
                os.fsencode(args.pattern),
                text,
                args.engine,
                config=config,
                t=args.t,
            )
            if result is None:
                _emit({"match": False})
                return EXIT_NO_MATCH
            _emit({"match": True, "parse": result})
            return EXIT_MATCH

        assert args.command == "bench"
        from .bench import bench

        engines = [e.strip() for e in args.engines.split(",") if e.strip()]
        n_targets = [int(x) for x in args.n.split(",")]
        m_targets = [int(x) for x in args.m.split(",")]
        for engine in engines:
            if engine not in ENGINES:
                print(f"reparse: unknown engine {engine!r}", file=sys.stderr)
                return EXIT_ERROR
        sink = open(args.out, "w") if args.out else sys.stdout
        try:
            for record in bench(engines, n_targets, m_targets, args.seeds, args.t):
                sink.write(record.to_json() + "\n")
        finally:
            if sink is not sys.stdout:
                sink.close()
        return EXIT_MATCH

    except PatternSyntaxError as exc:
        print(f"reparse: pattern error {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"reparse: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
