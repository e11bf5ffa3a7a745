"""Command-line entry point: ``smax generate|score|detect|experiment|version``.

Exit codes: 0 success, 2 usage or spec error, 3 data error (unreadable or
malformed files), 4 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import DomainError, GenerationError, ParseError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("smax")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _indexing(args) -> str:
    return "one-based" if args.one_based else "zero-based"


def _read_graph(path: str, args, k: int | None = None):
    """Edge list at ``path``.  Without a ``# nodes:`` header, trailing
    isolated nodes come from ``--nodes`` or the partition size ``k``."""
    from .graph import _NODES_HEADER, parse_edge_list

    text = Path(path).read_text()
    if _NODES_HEADER.search(text):
        k = None
    declared = max(k or 0, args.nodes or 0) or None
    return parse_edge_list(text, _indexing(args), dedupe=args.dedupe, k=declared, source=path)


def cmd_generate(args) -> int:
    from .generators import BenchmarkSpec, generate, parse_spec_file
    from .graph import write_edge_list, write_partition

    if args.spec_file:
        specs = parse_spec_file(Path(args.spec_file).read_text(), args.spec_file)
        reps = 1
    else:
        if args.family is None:
            raise DomainError("give a family (rc, ring, three) or --spec-file")
        if args.family == "rc":
            given = dict(k=args.k, communities=args.communities, pielou=args.pielou, R=args.R,
                         tolerance=args.tolerance)
            fields = {"k": 512, "communities": 16, "pielou": 0.75, "R": 0.0,
                      **{key: v for key, v in given.items() if v is not None}}
        elif args.family == "ring":
            fields = {"cliques": args.cliques or 8, "clique_size": args.clique_size or 5}
        else:
            fields = {"inter_links": args.inter_links or 3}
        specs = [BenchmarkSpec(args.family, seed=args.seed, **fields)]
        reps = args.replicates if args.family != "ring" else 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    indexing = _indexing(args)
    manifest = [f"# generated by smax {__version__}; node ids {indexing}", ""]
    count = 0
    for base in specs:
        for r in range(reps):
            spec = base.with_seed(base.seed + r)
            net = generate(spec)
            stem = spec.stem()
            (out / f"{stem}.edges").write_text(write_edge_list(net.graph, indexing))
            (out / f"{stem}.truth").write_text(write_partition(net.truth, indexing))
            manifest.append(spec.to_text())
            count += 1
    (out / "manifest.txt").write_text("\n".join(manifest))
    print(f"wrote {count} network(s) to {out}")
    return EXIT_OK


def cmd_score(args) -> int:
    from .experiment import to_csv
    from .graph import parse_partition
    from .metrics import partition_counts, quality, variation_of_information

    parts = [(path, parse_partition(Path(path).read_text(), _indexing(args), source=path))
             for path in args.partitions]
    g = _read_graph(args.graph, args, k=parts[0][1].k)
    for path, part in parts:
        if part.k != g.k:
            raise DomainError(f"{path}: partition covers {part.k} nodes, graph {args.graph} has {g.k}")
    rows = []
    for path, part in parts:
        q = quality(g, part)
        counts = partition_counts(g, part)
        rows.append({"kind": "score", "a": path, "b": "", "communities": part.count, "S": q.surprise,
                     "Q": "" if q.modularity is None else q.modularity, "F": counts.F, "n": counts.n,
                     "M": counts.M, "p": counts.p})
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            vi = variation_of_information(parts[i][1], parts[j][1])
            rows.append({"kind": "vi", "a": parts[i][0], "b": parts[j][0], "vi_nats": vi.vi_nats,
                         "vi_norm": vi.vi_normalized})
    cols = ["kind", "a", "b", "communities", "S", "Q", "F", "n", "M", "p", "vi_nats", "vi_norm"]
    sys.stdout.write(to_csv(cols, rows))
    return EXIT_OK


def cmd_detect(args) -> int:
    from .algorithms import DETECTORS, DetectionResult, run_detector, select_smax
    from .experiment import to_csv
    from .graph import parse_partition, write_partition
    from .metrics import quality

    names = [a.strip() for a in args.algo.split(",") if a.strip()] if args.algo else []
    unknown = [a for a in names if a not in DETECTORS]
    if unknown:
        raise DomainError(f"unknown algorithm {', '.join(unknown)}; available: {', '.join(DETECTORS)}")
    externals = [(p, parse_partition(Path(p).read_text(), _indexing(args), source=p))
                 for p in args.candidate or []]
    g = _read_graph(args.graph, args, k=max((part.k for _, part in externals), default=None))
    for path, part in externals:
        if part.k != g.k:
            raise DomainError(f"{path}: partition covers {part.k} nodes, graph {args.graph} has {g.k}")
    results = []
    for name in names:
        log.info("running %s", name)
        results.append(run_detector(name, g, args.seed))
    for path, part in externals:
        results.append(DetectionResult(f"external:{Path(path).name}", part, quality(g, part), 0.0))
    if not results:
        raise DomainError("nothing to select from: give --algo and/or --candidate")
    winner, table = select_smax(g, results)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.graph).stem
    rows = []
    won = False
    for res in table:
        is_winner = not won and res.partition == winner
        won = won or is_winner
        if out and not res.detector.startswith("external:"):
            (out / f"{stem}.{res.detector}.part").write_text(write_partition(res.partition, _indexing(args)))
        rows.append({"detector": res.detector, "communities": res.partition.count, "S": res.scores.surprise,
                     "Q": "" if res.scores.modularity is None else res.scores.modularity,
                     "wall_ms": res.wall_time * 1000.0, "winner": "*" if is_winner else ""})
    if out:
        (out / f"{stem}.smax.part").write_text(write_partition(winner, _indexing(args)))
    text = to_csv(["detector", "communities", "S", "Q", "wall_ms", "winner"], rows)
    if out:
        (out / f"{stem}.scores.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiment import parse_plan, run_experiment

    plan = parse_plan(Path(args.plan).read_text(), args.plan, paper_scale=args.paper_scale)
    outdir = args.out or plan.output or "results"
    report = run_experiment(plan, outdir, timing=not args.no_timing)
    print(f"{len(report.rows)} rows written to {outdir}")
    return EXIT_OK


def cmd_version(args) -> int:
    print(f"smax {__version__}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smax", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def io_flags(p):
        p.add_argument("--one-based", action="store_true", help="node ids in files start at 1")
        p.add_argument("--dedupe", action="store_true", help="collapse repeated edges (LFR files)")
        p.add_argument("--lfr", action="store_true", help="shorthand for --one-based --dedupe")
        p.add_argument("--nodes", type=int, help="node count, when trailing nodes have no edges")

    g = sub.add_parser("generate", help="write benchmark networks and their planted partitions")
    g.add_argument("family", nargs="?", choices=["rc", "ring", "three"])
    g.add_argument("--spec-file")
    g.add_argument("--k", type=int)
    g.add_argument("--communities", type=int)
    g.add_argument("--pielou", type=float)
    g.add_argument("--R", type=float)
    g.add_argument("--tolerance", type=float)
    g.add_argument("--cliques", type=int)
    g.add_argument("--clique-size", type=int)
    g.add_argument("--inter-links", type=int, choices=[2, 3])
    g.add_argument("--replicates", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".")
    g.add_argument("--one-based", action="store_true")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("score", help="Surprise, modularity and pairwise VI of partitions")
    s.add_argument("graph")
    s.add_argument("partitions", nargs="+")
    io_flags(s)
    s.set_defaults(func=cmd_score)

    d = sub.add_parser("detect", help="run detectors and select the highest-Surprise partition")
    d.add_argument("graph")
    d.add_argument("--algo", default="lpa,greedy-q,multilevel-q,greedy-s")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--candidate", action="append", help="external partition file (repeatable)")
    d.add_argument("--out")
    io_flags(d)
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("experiment", help="run a benchmark sweep from a plan file")
    e.add_argument("plan")
    e.add_argument("--out")
    e.add_argument("--paper-scale", action="store_true", help="100 replicates per parameter value")
    e.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for reproducible rows")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("version")
    v.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "lfr", False):
        args.one_based = args.dedupe = True
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DomainError, GenerationError) as exc:
        print(f"smax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"smax: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.exception("internal error")
        print(f"smax: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
