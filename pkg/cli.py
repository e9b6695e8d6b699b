#!/usr/bin/env python3
"""
Command-line interface for wavefront-kdv
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from analyzer import WavefrontAnalyzer
from config.logging_setup import setup_logging
from config.settings import EXIT_CODES, SUBCOMMANDS
from models.errors import ConfigError, WavefrontError

logger = logging.getLogger(__name__)

EXIT_OK = EXIT_CODES["ok"]
EXIT_VERIFY_FAILED = EXIT_CODES["verify_failed"]
EXIT_CONFIG = EXIT_CODES["config"]
EXIT_NUMERIC = EXIT_CODES["numeric"]


def print_colored(text, color_code, file=None):
    """Print colored text to terminal"""
    print(f"\033[{color_code}m{text}\033[0m", file=file or sys.stdout)


def print_summary(title: str, result: Dict[str, Any]):
    """Pretty print a result dict, file paths last"""
    print("\n" + "=" * 72)
    print_colored(title, "1;36")
    print("=" * 72)
    for key, value in result.items():
        if key in ("files", "trajectory", "map", "trace"):
            continue
        if isinstance(value, float):
            print(f"{key:<18} {value:.6g}")
        elif isinstance(value, (list, dict)):
            print(f"{key:<18} {json.dumps(value)}")
        else:
            print(f"{key:<18} {value}")
    for key in ("trajectory", "map", "trace"):
        if key in result:
            print_colored(f"wrote {result[key]}", "0;32")
    for path in result.get("files", []):
        print_colored(f"wrote {path}", "0;32")
    print("=" * 72 + "\n")


def print_verify_table(result: Dict[str, Any]):
    """One line per check: PASS/FAIL, duration, detail"""
    print("\n" + "=" * 72)
    print_colored("Self-verification", "1;36")
    print("=" * 72)
    for row in result["checks"]:
        status, color = ("PASS", "1;32") if row["passed"] else ("FAIL", "1;31")
        print_colored(f"{status}  {row['name']:<16} {row['seconds']:7.1f}s  {row['detail']}", color)
    print("=" * 72)
    if result["passed"]:
        print_colored("All checks passed", "1;32")
    else:
        failed = [r["name"] for r in result["checks"] if not r["passed"]]
        print_colored(f"{len(failed)} check(s) failed: {', '.join(failed)}", "1;31")
    print()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--config',
        type=str,
        help='Path to a key = value run configuration (defaults apply when omitted)'
    )
    common.add_argument(
        '--out',
        type=str,
        help='Output directory (overrides output.dir)'
    )
    common.add_argument(
        '--threads',
        type=int,
        help='Worker threads for map/detect (default: WAVEFRONT_KDV_THREADS, else 1)'
    )

    parser = argparse.ArgumentParser(
        prog="wavefront-kdv",
        description="Wave packet transform toolkit for wave front sets of linearized KdV",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Run the self-verification suite
  python cli.py verify

  # Only the spectral and propagator checks
  python cli.py verify --check spectral --check propagator

  # Classify the configured phase points
  python cli.py detect --config runs/jump.cfg --out output/jump

  # Classification map on four threads
  python cli.py map --config runs/soliton.cfg --threads 4

  # Soliton parameters and diagnostics as JSON
  python cli.py soliton-info --config runs/soliton.cfg
        """
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser('solve', parents=[common], help='Evolve the datum and write the trajectory')
    sub.add_parser('detect', parents=[common], help='Classify phase points with both criteria')
    sub.add_parser('map', parents=[common], help='Classification map over x and xi')
    sub.add_parser('trace', parents=[common], help='Trace one backward characteristic')
    sub.add_parser('soliton-info', parents=[common], help='Soliton parameters and diagnostics')

    verify = sub.add_parser('verify', parents=[common], help='Run the self-verification checks')
    verify.add_argument(
        '--check',
        action='append',
        metavar='NAME',
        help='Run only this check (repeatable)'
    )
    verify.add_argument(
        '--inject-sign-flip',
        action='store_true',
        help=argparse.SUPPRESS
    )
    return parser


def run_command(analyzer: WavefrontAnalyzer, args: argparse.Namespace) -> int:
    if args.command == "solve":
        print_summary("Solve", analyzer.solve(args.out))
    elif args.command == "detect":
        print_summary("Detect", analyzer.detect(args.out))
    elif args.command == "map":
        print_summary("Map", analyzer.map(args.out))
    elif args.command == "trace":
        print_summary("Trace", analyzer.trace(args.out))
    elif args.command == "soliton-info":
        print(json.dumps(analyzer.soliton_info(), sort_keys=True, indent=2))
    elif args.command == "verify":
        result = analyzer.verify(args.check, inject_sign_flip=args.inject_sign_flip)
        print_verify_table(result)
        if not result["passed"]:
            return EXIT_VERIFY_FAILED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    setup_logging()

    try:
        analyzer = WavefrontAnalyzer(args.config, threads=args.threads)
        return run_command(analyzer, args)
    except ConfigError as e:
        keys = f" [{', '.join(e.keys)}]" if e.keys else ""
        logger.error(f"Configuration rejected{keys}: {e}")
        print_colored(f"✗ Config error{keys}: {e}", "1;31", file=sys.stderr)
        return EXIT_CONFIG
    except WavefrontError as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=True)
        print_colored(f"✗ {type(e).__name__}: {e}", "1;31", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        print_colored(f"✗ Unexpected error: {e}", "1;31", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
