#!/usr/bin/env python3
"""
Crowd Monitor
Command-line entry point: profile contributors, aggregate answers,
evaluate error curves on gold data and simulate campaigns.
"""
import argparse
import logging
import os
import secrets
import sys
from typing import List, Optional

from dotenv import load_dotenv

from aggregation import GROUPINGS, aggregate_campaign, evaluate_groups
from campaign_io import (
    gold_times,
    load_config,
    load_contributions,
    load_gold,
    write_aggregates,
    write_results,
)
from crowd_sim import (
    DEFAULT_GOLD_PER_HIT,
    DEFAULT_HITS,
    DEFAULT_QUESTIONS_PER_HIT,
    default_archetypes,
    generate,
    load_archetype_spec,
    write_synthetic_campaign,
)
from errors import CrowdMonitorError, ValidationError
from monitor import ContributorMonitor, summarize_crowd
from utils import format_mass, format_table, log_run, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64


class CrowdMonitorParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 64"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def unit_interval(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"lambda must be in [0, 1], got {text}")
    return value


def _profiles(args):
    config = load_config(args.config)
    contributions = load_contributions(args.contributions, config)
    gold = load_gold(args.gold, config)
    monitor = ContributorMonitor.from_config(config, gold_times(gold))
    return config, contributions, gold, monitor.profile_all(contributions)


def cmd_profile(args) -> int:
    """Profile every contributor and write IP_c, masses, betP and decisions"""
    config, contributions, _, profiles = _profiles(args)
    summary = summarize_crowd(contributions, profiles, config.frame)
    write_results(profiles, [], args.out, args.format, config=config, summary=summary)

    print(format_table(
        ["contributor", "IP_c", "m2", "m3", "decision"],
        [
            [p.contributor_id, p.ip_c, format_mass(p.qualification.mass_omega2),
             format_mass(p.reflection.mass_omega3), p.decision_label]
            for p in profiles
        ],
    ))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    """Error curves over the lambda grid for the requested contributor groups"""
    if args.groups == "all":
        config = load_config(args.config)
        contributions = load_contributions(args.contributions, config)
        gold = load_gold(args.gold, config)
        profiles = []
    else:
        config, contributions, gold, profiles = _profiles(args)

    curves = evaluate_groups(
        contributions, gold, profiles, args.groups, config.lambda_grid, config.frame,
        config.argmax_tol,
    )
    write_results([], curves, args.out, args.format, config=config)

    rows = []
    for label, curve in curves:
        if curve is None:
            rows.append([label, None, None, None])
            continue
        best = min(range(len(curve.error_rates)), key=lambda i: curve.error_rates[i])
        rows.append([label, curve.lambda_grid[best], curve.error_rates[best], curve.mv_error])
    print(format_table(["group", "best lambda", "error rate", "MV error"], rows))
    return EXIT_OK


def cmd_aggregate(args) -> int:
    """Aggregate the answers of every question at one lambda"""
    config = load_config(args.config)
    contributions = load_contributions(args.contributions, config)
    rows = aggregate_campaign(contributions, config.frame, args.lam, config.argmax_tol)
    write_aggregates(rows, args.out, args.format, lam=args.lam, config=config)

    frame = config.frame
    print(format_table(
        ["question", "m_lambda", "decision", "MV"],
        [
            [r.question_id, format_mass(r.mass),
             ";".join(frame.labels[i] for i in sorted(r.decision)),
             ";".join(frame.labels[i] for i in sorted(r.mv_decision))]
            for r in rows
        ],
    ))
    return EXIT_OK


def cmd_simulate(args) -> int:
    """Write a synthetic campaign"""
    seed = args.seed
    if seed is None:
        seed = secrets.randbelow(2 ** 31)
        print(f"seed: {seed}")

    # a config fixes the answer frame; the spec file must agree with it
    config = load_config(args.config) if args.config else None
    config_frame = config.frame if config else None
    if args.spec:
        spec = load_archetype_spec(args.spec, config_frame)
        specs, frame = spec["specs"], spec["frame"]
        n_hits, n_questions, gold_per_hit = (
            spec["n_hits"], spec["n_questions_per_hit"], spec["gold_per_hit"]
        )
    else:
        frame = config_frame
        specs = default_archetypes(frame)
        n_hits, n_questions, gold_per_hit = (
            DEFAULT_HITS, DEFAULT_QUESTIONS_PER_HIT, DEFAULT_GOLD_PER_HIT
        )

    campaign = generate(specs, n_hits, n_questions, frame=frame, seed=seed, config=config,
                        gold_per_hit=gold_per_hit)
    paths = write_synthetic_campaign(campaign, args.out_dir)
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_summary(args) -> int:
    """Crowd statistics: imprecise answers and the share of every decision"""
    config, contributions, _, profiles = _profiles(args)
    summary = summarize_crowd(contributions, profiles, config.frame)
    print(f"Contributors: {summary.n_contributors}, contributions: {summary.n_contributions}")
    print(f"Imprecise contributions: {summary.imprecise_share:.1%} "
          f"from {summary.contributors_using_imprecision} contributors")
    for title, shares in (("profile", summary.profile_shares),
                          ("precision", summary.precision_shares),
                          ("reflection", summary.reflection_shares)):
        print(format_table([title, "share"], [[k, v] for k, v in shares.items()]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CrowdMonitorParser(
        prog="crowd_monitor",
        description="Profile crowdsourcing contributors and aggregate their answers "
                    "with belief functions",
    )
    parser.add_argument("--log-level", default=None,
                        help="DEBUG, INFO, WARNING or ERROR (default: $CROWD_MONITOR_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def campaign_inputs(p, gold: bool = True):
        p.add_argument("--contributions", required=True, help="contributions CSV")
        if gold:
            p.add_argument("--gold", required=True, help="gold CSV (reference times and answers)")
        p.add_argument("--config", required=True, help="campaign configuration JSON")

    p = sub.add_parser("profile", help="estimate contributor profiles")
    campaign_inputs(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("evaluate", help="error curves over lambda on gold questions")
    campaign_inputs(p)
    p.add_argument("--groups", choices=GROUPINGS, default="all")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("aggregate", help="aggregate answers at one lambda")
    campaign_inputs(p, gold=False)
    p.add_argument("--lambda", dest="lam", type=unit_interval, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("simulate", help="write a synthetic campaign")
    p.add_argument("--spec", help="simulation spec JSON (default archetypes otherwise)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", help="campaign configuration JSON (answer labels, confidence scale)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("summary", help="crowd statistics")
    campaign_inputs(p)
    p.set_defaults(func=cmd_summary)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(
        args.log_level or os.getenv("CROWD_MONITOR_LOG_LEVEL", "INFO"),
        os.getenv("CROWD_MONITOR_LOG_FILE") or None,
    )

    try:
        code = args.func(args)
    except ValidationError as e:
        logger.error(f"Validation failed: {e}")
        code = EXIT_VALIDATION
    except CrowdMonitorError as e:
        logger.error(f"{type(e).__name__}: {e}")
        code = EXIT_VALIDATION
    except OSError as e:
        logger.error(f"I/O error: {e}")
        code = EXIT_IO
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        code = EXIT_VALIDATION
    log_run(args.command, code == EXIT_OK)
    return code


if __name__ == "__main__":
    sys.exit(main())
