"""Command-line entry point: ``sl2branch <command> [flags]``.

Exit codes: 0 success, 2 invalid flags, 3 certification failure, 4 budget exceeded (--strict).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

from . import branching as br
from .classfun import set_threads
from .fqchars import MAX_Q, cuspidal_csv
from .localfield import residue_field
from .yudata import YuDatum, data_of_depth, parse_depth

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_BUDGET = 0, 2, 3, 4


@dataclass
class RunConfig:
    q: int = 3
    max_depth: int = 3
    tol: float = 1e-6
    threads: int | None = None
    cap: int = br.DEFAULT_CAP
    fmt: str = "json"
    out: str | None = None
    strict: bool = False

    def validate(self) -> None:
        residue_field(self.q)  # raises for non prime powers / even q
        if self.q > MAX_Q:
            raise ValueError(f"q must be at most {MAX_Q}")
        if self.max_depth < 0:
            raise ValueError("--max-depth must be >= 0")
        if not 0 < self.tol <= 1e-3:
            raise ValueError("--tol must lie in (0, 1e-3]")
        if self.cap <= 0:
            raise ValueError("--cap must be positive")
        if self.threads is not None and self.threads < 1:
            raise ValueError("--threads must be >= 1")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--max-depth", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--cap", type=int, default=br.DEFAULT_CAP)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(fmt="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="sl2branch", description="Branching rules for SL2 supercuspidals to SL2(R).")
    sub = parser.add_subparsers(dest="command", required=True)

    table = sub.add_parser("table", help="branching tables")
    tsub = table.add_subparsers(dest="kind", required=True)
    dz = tsub.add_parser("depth-zero", parents=[common])
    dz.add_argument("--omega", required=True, help="DL index j, or plus / minus")
    dz.add_argument("--vertex", required=True, type=int, choices=(0, 1))
    pos = tsub.add_parser("positive", parents=[common])
    pos.add_argument("--torus", default=None)
    pos.add_argument("--r", default=None, help='"k" or "k/2"')
    pos.add_argument("--phi", type=int, default=0, help="index into the enumerated characters")
    pos.add_argument("--datum", default=None, help="datum JSON file")

    inter = sub.add_parser("intertwine", parents=[common])
    inter.add_argument("--datum", action="append", required=True)

    chars = sub.add_parser("chars")
    csub = chars.add_subparsers(dest="kind", required=True)
    csub.add_parser("sl2fq", parents=[common])

    verify = sub.add_parser("verify")
    vsub = verify.add_subparsers(dest="kind", required=True)
    suite = vsub.add_parser("suite", parents=[common])
    suite.add_argument("--filter", default=None)
    suite.add_argument("--skip-heisenberg-certification", action="store_true")
    return parser


class UsageError(ValueError):
    pass


def _config(args) -> RunConfig:
    cfg = RunConfig(args.q, args.max_depth, args.tol, args.threads, args.cap, args.fmt, args.out, args.strict)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table_exit(cfg: RunConfig, table: br.BranchingTable) -> int:
    _emit(cfg, table.to_csv() if cfg.fmt == "csv" else table.dumps() + "\n")
    if not table.all_certified:
        print("certification failed: " + "; ".join(table.failures()), file=sys.stderr)
        return EXIT_CERT
    if table.unverified:
        print(f"{len(table.unverified)} component(s) over the element cap: predicted, unverified", file=sys.stderr)
        if cfg.strict:
            return EXIT_BUDGET
    return EXIT_OK


def _load_descriptor(path: str, q: int) -> br.Descriptor:
    try:
        with open(path) as fh:
            obj = json.load(fh)
        return br.descriptor_from_json(obj, q)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"bad datum file {path}: {exc}") from exc


def cmd_table_depth_zero(args, cfg: RunConfig) -> int:
    try:
        datum = br.DepthZeroDatum(cfg.q, str(args.omega), args.vertex)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return _table_exit(cfg, br.depth_zero_components(datum, cfg.max_depth, cfg.cap))


def _positive_datum(args, cfg: RunConfig) -> YuDatum:
    if args.datum:
        d = _load_descriptor(args.datum, cfg.q)
        if not isinstance(d, YuDatum):
            raise UsageError("--datum must describe a positive-depth datum")
        return d
    if args.torus is None or args.r is None:
        raise UsageError("need --torus and --r, or --datum")
    try:
        data = data_of_depth(args.torus, cfg.q, parse_depth(args.r))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not 0 <= args.phi < len(data):
        raise UsageError(f"--phi must lie in [0, {len(data)})")
    return data[args.phi]


def cmd_table_positive(args, cfg: RunConfig) -> int:
    datum = _positive_datum(args, cfg)
    if cfg.max_depth < datum.r:
        raise UsageError("--max-depth must be at least r")
    table = br.positive_depth_components(datum, cfg.max_depth, cfg.cap, raise_on_failure=False)
    return _table_exit(cfg, table)


def cmd_intertwine(args, cfg: RunConfig) -> int:
    data = [_load_descriptor(p, cfg.q) for p in args.datum]
    tables = [br.components(d, cfg.max_depth, cfg.cap, raise_on_failure=False) for d in data]
    rep = br.intertwining_matrix(data, cfg.max_depth, cfg.cap, tables=tables)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + [d.label for d in data])
        for d, row in zip(data, rep.matrix.tolist()):
            w.writerow([d.label] + row)
        _emit(cfg, buf.getvalue())
    else:
        _emit(cfg, json.dumps(rep.to_json(), indent=2) + "\n")
    if not all(t.all_certified for t in tables):
        return EXIT_CERT
    if any(t.unverified for t in tables) and cfg.strict:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_chars(args, cfg: RunConfig) -> int:
    _emit(cfg, cuspidal_csv(cfg.q))
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    from .suite import run_suite

    lines = []

    def emit(line: str) -> None:
        lines.append(line)
        print(line, flush=True)

    results = run_suite(cfg.q, cfg.max_depth, args.filter, emit,
                        heisenberg_certify=not args.skip_heisenberg_certification, cap=cfg.cap)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    if not results:
        print("no checks matched the filter", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if all(r.passed for r in results) else EXIT_CERT


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad flags
    try:
        cfg = _config(args)
        set_threads(cfg.threads)  # None defers to $SL2B_THREADS
        if args.command == "table":
            return cmd_table_depth_zero(args, cfg) if args.kind == "depth-zero" else cmd_table_positive(args, cfg)
        if args.command == "intertwine":
            return cmd_intertwine(args, cfg)
        if args.command == "chars":
            return cmd_chars(args, cfg)
        return cmd_verify(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sl2branch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except br.BudgetExceeded as exc:
        print(f"sl2branch: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
