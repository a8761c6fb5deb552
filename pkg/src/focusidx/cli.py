"""`focus` command line: simulate / tune / ingest / query / report.

Exit codes: 0 success, 1 usage error, 2 malformed data or file,
3 no viable config for the requested accuracy targets.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import index as index_mod, ingest as ingest_mod, simharness, tuner
from .classifiers import load_profiles, make_default_profiles, save_profiles
from .core import OTHER_CLASS, AccuracyTarget, load_config, save_config
from .errors import DataError, NoViableConfig, UsageError
from .query import QuerySession
from .streamio import read_stream, write_stream

log = logging.getLogger("focus")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"focus: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="focus",
                description="Low-cost top-K video stream indexing with "
                            "query-time ground-truth verification.")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[], help="generate a synthetic labeled stream")
    sim.add_argument("--out", required=True, help="output stream file")
    sim.add_argument("--spec", help="stream spec file (key=value)")
    sim.add_argument("--n-objects", type=int)
    sim.add_argument("--fps", type=float)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--stream-id")
    sim.add_argument("--write-spec", help="also write the effective spec here")

    tun = sub.add_parser("tune", help="pick ingest parameters for one stream")
    tun.add_argument("--stream", required=True)
    tun.add_argument("--out", required=True,
                     help="config output path; the augmented profile registry "
                          "is written next to it as <out>.profiles")
    tun.add_argument("--profiles", help="profile registry file (default: built-ins)")
    tun.add_argument("--precision-target", type=float, default=0.95)
    tun.add_argument("--recall-target", type=float, default=0.95)
    tun.add_argument("--policy", choices=("balance", "opt-ingest", "opt-query"),
                     default="balance")
    tun.add_argument("--emit", help="write every grid evaluation to this CSV")
    tun.add_argument("--seed", type=int, default=0)

    ing = sub.add_parser("ingest", help="build the top-K index for a stream")
    ing.add_argument("--stream", required=True)
    ing.add_argument("--config", required=True)
    ing.add_argument("--out", required=True, help="index output file")
    ing.add_argument("--profiles")
    ing.add_argument("--pixel-eps", type=float, default=ingest_mod.DEFAULT_PIXEL_EPS)
    ing.add_argument("--seed", type=int, default=0)

    qry = sub.add_parser("query", help="query an index with GT verification")
    qry.add_argument("--index", required=True)
    qry.add_argument("--stream", required=True,
                     help="the ingested stream (cluster representatives are "
                          "re-read for verification)")
    qry.add_argument("--class", dest="class_id", required=True,
                     help="class id, or OTHER")
    qry.add_argument("--kx", type=int, help="query at a smaller top-k than indexed")
    qry.add_argument("--start", type=int, help="first frame id (inclusive)")
    qry.add_argument("--end", type=int, help="last frame id (inclusive)")
    qry.add_argument("--profiles")

    rep = sub.add_parser("report", help="run the end-to-end experiment for a spec")
    rep.add_argument("--spec", help="stream spec file (default: built-in defaults)")
    rep.add_argument("--out", required=True, help="output directory for CSVs")
    rep.add_argument("--precision-target", type=float, default=0.95)
    rep.add_argument("--recall-target", type=float, default=0.95)
    rep.add_argument("--no-ablation", action="store_true")
    rep.add_argument("--markdown", action="store_true",
                     help="also render <out>/report.md")
    return p


def _load_registry(path, vocab):
    return load_profiles(path) if path else make_default_profiles(vocab)


def _cmd_simulate(args) -> int:
    spec = simharness.load_spec(args.spec) if args.spec else simharness.StreamSpec()
    overrides = {k: getattr(args, k) for k in ("n_objects", "fps", "seed", "stream_id")
                 if getattr(args, k) is not None}
    if overrides:
        from dataclasses import replace
        spec = replace(spec, **overrides).validate()
    header, objects = simharness.generate_stream(spec)
    write_stream(args.out, header, objects)
    if args.write_spec:
        with open(args.write_spec, "w", encoding="utf-8") as fh:
            fh.write(simharness.format_spec(spec))
    print(f"objects={len(objects)}")
    print(f"out={args.out}")
    return 0


def _cmd_tune(args) -> int:
    header, objects = read_stream(args.stream)
    profiles = _load_registry(args.profiles, header.vocab)
    targets = AccuracyTarget(precision_target=args.precision_target,
                             recall_target=args.recall_target)
    outcome, result = tuner.tune(header, objects, profiles, targets=targets,
                                 seed=args.seed)
    pick = {"balance": outcome.balance,
            "opt-ingest": outcome.opt_ingest,
            "opt-query": outcome.opt_query}[args.policy]
    save_config(pick.cfg, args.out)
    save_profiles(result.profiles, f"{args.out}.profiles")
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write("profile,l_s,k,t,m,recall,precision,ingest_cost,query_cost,viable\n")
            for e in result.evaluations:
                c = e.cfg
                fh.write(f"{c.profile_id},{c.l_s},{c.k},{c.t:.6f},{c.m},"
                         f"{e.est_recall:.6f},{e.est_precision:.6f},"
                         f"{e.ingest_cost:.6f},{e.query_cost:.6f},{int(e.viable)}\n")
    print(f"policy={args.policy}")
    print(f"profile={pick.cfg.profile_id}")
    print(f"k={pick.cfg.k}")
    print(f"l_s={pick.cfg.l_s}")
    print(f"t={pick.cfg.t:.6f}")
    print(f"est_recall={pick.est_recall:.6f}")
    print(f"est_precision={pick.est_precision:.6f}")
    print(f"pareto_points={len(outcome.pareto)}")
    print(f"out={args.out}")
    return 0


def _cmd_ingest(args) -> int:
    header, objects = read_stream(args.stream)
    cfg = load_config(args.config)
    profiles = _load_registry(args.profiles, header.vocab)
    idx, report = ingest_mod.ingest_stream(header, objects, cfg, profiles,
                                           pixel_eps=args.pixel_eps, seed=args.seed)
    index_mod.save(idx, args.out)
    print(f"objects_seen={report.objects_seen}")
    print(f"objects_classified={report.objects_classified}")
    print(f"clusters={report.clusters_emitted}")
    print(f"ingest_cost_units={report.ingest_cost_units:.6f}")
    print(f"dedup_savings_units={report.dedup_savings_units:.6f}")
    print(f"out={args.out}")
    return 0


def _cmd_query(args) -> int:
    idx = index_mod.load(args.index)
    header, objects = read_stream(args.stream)
    profiles = _load_registry(args.profiles, header.vocab)
    gt = tuner.find_gt_profile(profiles)
    ingest_profile = profiles.get(idx.header.config.profile_id)
    if args.class_id.strip().upper() == "OTHER":
        class_id = OTHER_CLASS
    else:
        try:
            class_id = int(args.class_id)
        except ValueError:
            raise UsageError(f"bad class id {args.class_id!r}") from None
    if (args.start is None) != (args.end is None):
        raise UsageError("--start and --end must be given together")
    time_range = None if args.start is None else (args.start, args.end)
    session = QuerySession(idx, gt, {o.object_id: o for o in objects},
                           ingest_profile=ingest_profile)
    result = session.route_query(class_id, k_x=args.kx, time_range=time_range)
    print(f"frames={','.join(str(f) for f in result.frame_ids)}")
    print(f"objects={','.join(str(o) for o in result.object_ids)}")
    print(f"clusters_examined={result.clusters_examined}")
    print(f"clusters_matched={result.clusters_matched}")
    print(f"gt_inferences={result.gt_inferences}")
    print(f"query_cost_units={result.query_cost_units:.6f}")
    return 0


def _cmd_report(args) -> int:
    spec = simharness.load_spec(args.spec) if args.spec else simharness.StreamSpec()
    targets = AccuracyTarget(precision_target=args.precision_target,
                             recall_target=args.recall_target)
    report = simharness.run_experiment(spec, targets=targets,
                                       include_ablation=not args.no_ablation)
    simharness.write_report(report, args.out)
    if args.markdown:
        import os
        with open(os.path.join(args.out, "report.md"), "w", encoding="utf-8") as fh:
            fh.write(simharness.render_markdown(args.out))
    balance = report.runs[0]
    print(f"ingest_speedup={balance.ingest_speedup:.6f}")
    print(f"query_speedup={balance.query_speedup:.6f}")
    print(f"precision={balance.precision:.6f}")
    print(f"recall={balance.recall:.6f}")
    print(f"out={args.out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "tune": _cmd_tune,
    "ingest": _cmd_ingest,
    "query": _cmd_query,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):  # --help
            return 0
        print(exc.code, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except NoViableConfig as exc:
        print(f"focus: no viable config: {exc}", file=sys.stderr)
        return 3
    except UsageError as exc:
        print(f"focus: usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"focus: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
