"""mccomp: one command line for the whole toolkit.

Exit codes: 0 ok, 1 diagnostics contained errors, 2 usage error,
10 counting ran out of resources.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

from . import FORMAT_REVISION, __version__
from .cnf_io import (FormatError, has_errors, load_instance, parse_instance, read_bytes, repair,
                     save_instance, write_diagnostics, write_instance)
from .core import CountResult, ProblemKind
from .counting import (BruteForceLimitError, ResourceExhausted, SearchLimits, compile_ddnnf, count,
                       count_bruteforce)
from .counting.bruteforce import is_satisfiable_bruteforce
from .exact import format_exact
from .generators import (GeneratorConfig, gen_projection, gen_weights_random, gen_weights_via_counting_graph,
                         generate_directory)
from .judge import (ExpectedCount, RankingConfig, judge_run, score_and_rank, standings_to_json,
                    standings_to_markdown, verdicts_to_csv, verdicts_to_jsonl)
from .solver_output import parse_solver_output, write_solver_output

EXIT_OK, EXIT_DIAG, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 10

log = logging.getLogger("mccomp")


def _emit(args, text=None, payload=None):
    """Human text, or its JSON mirror under --json."""
    if args.json:
        print(json.dumps(payload, sort_keys=True, default=str))
    elif text is not None:
        sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")


def _write_out(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load(path, stream=sys.stderr):
    """Parse an instance; print diagnostics; return None if it has errors."""
    inst, diags = parse_instance(read_bytes(path))
    write_diagnostics(diags, stream=stream)
    return None if has_errors(diags) else inst


# --- subcommands -------------------------------------------------------------

def cmd_check(args):
    inst, diags = parse_instance(read_bytes(args.file))
    write_diagnostics(diags, stream=sys.stderr)
    bad = has_errors(diags)
    summary = (f"{args.file}: {inst.kind} n={inst.num_vars} m={inst.formula.num_clauses} "
               f"{'INVALID' if bad else 'valid'}")
    _emit(args, summary, {"file": args.file, "valid": not bad, "kind": inst.kind.value,
                          "diagnostics": [json.loads(d.to_json()) for d in diags]})
    return EXIT_DIAG if bad else EXIT_OK


def cmd_repair(args):
    text, diags = repair(read_bytes(args.file))
    write_diagnostics(diags, stream=sys.stderr)
    if args.json:
        _emit(args, payload={"text": text, "diagnostics": [json.loads(d.to_json()) for d in diags]})
    else:
        _write_out(args.output, text)
    return EXIT_DIAG if has_errors(diags) else EXIT_OK


def cmd_convert(args):
    inst = _load(args.file)
    if inst is None:
        return EXIT_DIAG
    if args.output and args.output != "-":
        save_instance(inst, args.output)
        _emit(args, None, {"output": args.output})
    else:
        _emit(args, write_instance(inst), {"text": write_instance(inst)})
    return EXIT_OK


def cmd_count(args):
    inst = _load(args.file)
    if inst is None:
        return EXIT_DIAG
    limits = SearchLimits(cache_bytes=args.cache_mb * 2**20, max_decisions=args.max_decisions,
                          time_limit_s=args.time_limit)
    comments = [f"mccomp {__version__} {'bruteforce' if args.brute else 'component-caching'}"]
    try:
        if args.ddnnf:
            d = compile_ddnnf(inst, limits)
            _write_out(args.ddnnf, d.to_nnf())
            comments.append(f"ddnnf nodes {len(d.nodes)}")
        if args.brute:
            value = count_bruteforce(inst)
            sat = None
            if value == 0 and inst.kind.weighted:
                sat = is_satisfiable_bruteforce(inst.formula)
            result = CountResult.from_count(inst.kind, value, sat)
        else:
            result = count(inst, limits)
    except (ResourceExhausted, BruteForceLimitError) as exc:
        print(f"c resource exhausted: {exc}", file=sys.stderr)
        sys.stdout.write("s UNKNOWN\n")
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(args, write_solver_output(result, comments),
          {"satisfiable": result.satisfiable.value, "type": result.kind.value,
           "exact": format_exact(result.exact, max_places=0), "log10": result.log10_estimate})
    return EXIT_OK


def _gen_config(args):
    kw = {"seed": args.seed}
    if getattr(args, "digits", None) is not None:
        kw["weight_digits"] = args.digits
    if getattr(args, "ratio", None) is not None:
        kw["projection_ratio"] = Fraction(args.ratio)
    if getattr(args, "band", None) is not None:
        kw["target_log10_band"] = tuple(args.band)
    return GeneratorConfig(**kw)


def _generate(args, generator):
    cfg = _gen_config(args)
    if os.path.isdir(args.file):
        if not args.output:
            print("error: directory input needs -o OUTPUT_DIR", file=sys.stderr)
            return EXIT_USAGE
        rows = generate_directory(args.file, args.output, generator, cfg)
        _emit(args, f"{len(rows)} instances written to {args.output}", {"rows": rows})
        return EXIT_OK
    inst = _load(args.file)
    if inst is None:
        return EXIT_DIAG
    try:
        if generator == "projection":
            out, report = gen_projection(inst, cfg), None
        elif generator == "counting-graph":
            out, report = gen_weights_via_counting_graph(inst, cfg)
        else:
            out, report = gen_weights_random(inst, cfg), None
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report is not None:
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
    if args.output and args.output != "-":
        save_instance(out, args.output)
        _emit(args, None, {"output": args.output})
    else:
        _emit(args, write_instance(out), {"text": write_instance(out)})
    return EXIT_OK


def cmd_gen_weights(args):
    return _generate(args, "counting-graph" if args.counting_graph else "random")


def cmd_gen_projection(args):
    return _generate(args, "projection")


def cmd_judge(args):
    report, diags = parse_solver_output(read_bytes(args.report))
    write_diagnostics(diags, stream=sys.stderr)
    v = judge_run(report, ExpectedCount.parse(args.expected), RankingConfig.for_mode(args.mode),
                  instance=os.path.basename(args.report))
    _emit(args, f"{v.kind.value} error={v.error}",
          {"verdict": v.kind.value, "error": v.error, "observed_log10": v.observed_log10,
           "expected_log10": v.expected_log10, "mode": args.mode})
    return EXIT_OK


def _campaign(args):
    from .harness import load_campaign_config

    cfg = load_campaign_config(args.config)
    if getattr(args, "parallelism", None):
        cfg.parallelism = args.parallelism
    return cfg


def _read_ids(path):
    with open(path) as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_score(args):
    from .harness import RecordStore, judge_records

    cfg = _campaign(args)
    records = RecordStore(cfg.store).load()
    table = judge_records(records, cfg.solvers, cfg.expected)
    only = _read_ids(args.only) if args.only else None
    modes = {s.id: RankingConfig.for_mode(s.declared_mode) for s in cfg.solvers}
    standings = score_and_rank(table, modes, only)
    _emit(args, standings_to_markdown(standings), standings_to_json(standings))
    return EXIT_OK


def cmd_run(args):
    from .harness import evaluate_campaign, records_summary_csv

    cfg = _campaign(args)
    result = evaluate_campaign(cfg.solvers, cfg.instances, cfg.expected, cfg.limits, cfg.store,
                               parallelism=cfg.parallelism)
    base = os.path.splitext(cfg.store)[0]
    with open(base + "-summary.csv", "w") as fh:
        fh.write(records_summary_csv(result.records, result.verdicts))
    with open(base + "-verdicts.csv", "w") as fh:
        fh.write(verdicts_to_csv(result.verdicts))
    modes = {s.id: RankingConfig.for_mode(s.declared_mode) for s in cfg.solvers}
    standings = score_and_rank(result.verdicts, modes)
    print(f"c {result.new_runs} new runs, {len(result.records)} records in {cfg.store}", file=sys.stderr)
    _emit(args, standings_to_markdown(standings),
          {"new_runs": result.new_runs, "standings": standings_to_json(standings),
           "verdicts": [json.loads(x) for x in verdicts_to_jsonl(result.verdicts).splitlines()]})
    return EXIT_OK


def cmd_cdf(args):
    from .harness import RecordStore, cdf_to_csv, export_cdf, judge_records

    cfg = _campaign(args)
    table = judge_records(RecordStore(cfg.store).load(), cfg.solvers, cfg.expected)
    series = export_cdf(table)
    if args.json:
        _emit(args, payload={s: [list(p) for p in pts] for s, pts in series.items()})
    else:
        _write_out(args.output, cdf_to_csv(series))
    return EXIT_OK


def cmd_select(args):
    from .selection import load_pool, select_balanced_2021, select_random_by_set_2022

    pool = load_pool(args.pool, baseline=args.baseline)
    if args.scheme == "2021":
        res = select_balanced_2021(pool, args.seed)
    else:
        res = select_random_by_set_2022(pool, args.seed)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.json:
        _emit(args, payload=[{"number": k, "id": i, "bucket": b} for k, i, b in res.numbered()])
    else:
        _write_out(args.output, res.to_csv())
    return EXIT_OK


def cmd_split(args):
    import csv

    with open(args.selection, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["number"]))
    from .selection import split_public_private

    public, private = split_public_private([r["id"] for r in rows])
    if args.json:
        _emit(args, payload={"public": public, "private": private})
        return EXIT_OK
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        for name, ids in (("public", public), ("private", private)):
            with open(os.path.join(args.output_dir, name + ".txt"), "w") as fh:
                fh.write("".join(i + "\n" for i in ids))
    lines = ["set,id"] + [f"public,{i}" for i in public] + [f"private,{i}" for i in private]
    if not args.output_dir:
        print("\n".join(lines))
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized step (default 0)")
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="mccomp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mccomp {__version__} ({FORMAT_REVISION})")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("check", cmd_check, "validate an instance file")
    sp.add_argument("file")

    sp = add("repair", cmd_repair, "fix common format mistakes")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("convert", cmd_convert, "rewrite an instance in canonical form (.xz output compresses)")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")

    sp = add("count", cmd_count, "exact count in competition output format")
    sp.add_argument("file")
    sp.add_argument("--brute", action="store_true", help="use the brute-force oracle (small n only)")
    sp.add_argument("--ddnnf", metavar="OUT", help="also write the compiled Decision-DNNF (mc/wmc)")
    sp.add_argument("--cache-mb", type=int, default=4096)
    sp.add_argument("--max-decisions", type=int)
    sp.add_argument("--time-limit", type=float)

    sp = add("gen-weights", cmd_gen_weights, "turn an mc instance (or directory) into wmc")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")
    sp.add_argument("--counting-graph", action="store_true", help="steer weights via the compiled graph")
    sp.add_argument("--digits", type=int)
    sp.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"))

    sp = add("gen-projection", cmd_gen_projection, "add a random projection set")
    sp.add_argument("file")
    sp.add_argument("-o", "--output")
    sp.add_argument("--ratio", help="probability a variable is projected (default 1/2)")

    sp = add("judge", cmd_judge, "judge one solver output against one expected count")
    sp.add_argument("report")
    sp.add_argument("--expected", required=True, help="integer, decimal, p/q or 'unk'")
    sp.add_argument("--mode", default="A", choices=["A", "B", "C", "D", "uniform2021"])

    sp = add("score", cmd_score, "standings from a campaign's record store")
    sp.add_argument("config")
    sp.add_argument("--only", help="file with instance ids to score (e.g. private.txt)")

    sp = add("select", cmd_select, "select 200 benchmark instances from a pool")
    sp.add_argument("pool")
    sp.add_argument("--scheme", choices=["2021", "2022"], default="2022")
    sp.add_argument("--baseline", default="sharpsat", help="solver whose runtime filters easy instances")
    sp.add_argument("-o", "--output")

    sp = add("split", cmd_split, "split a numbered selection into public (even) / private (odd)")
    sp.add_argument("selection")
    sp.add_argument("-d", "--output-dir")

    sp = add("run", cmd_run, "run a campaign (resumes from its record store)")
    sp.add_argument("config")
    sp.add_argument("-j", "--parallelism", type=int)

    sp = add("cdf", cmd_cdf, "export solved-vs-time series from a campaign")
    sp.add_argument("config")
    sp.add_argument("-o", "--output")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    banner = {k: v for k, v in vars(args).items() if k != "func"}
    print("c config " + json.dumps(banner, sort_keys=True), file=sys.stderr)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAG
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
