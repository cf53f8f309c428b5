"""Command-line interface.

Subcommands ``generate``, ``classify``, ``blocksvd``, ``dimension`` and
``study``.  JSON results go to stdout and short summaries to stderr.

Exit codes: 0 success, 2 usage or parse error, 3 non-unitary operator,
4 no block decomposition.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .blocksvd import NotBlockDiagonalError, canonicalize, compute_block_svd
from .channels import NotUnitaryError
from .classify import CLASS_NAMES, classify_all, consistency_violations
from .generate import (
    GENERATORS,
    PRNG_NAME,
    const_unitary,
    named_examples,
    sample_block_diag_A,
)
from .matcore import BipartiteOperator, DimensionError, Tolerances, swap_factors
from .tangent import (
    DimensionReport,
    NotUnitalMemberError,
    block_coefficients,
    enveloping_dim_analytic,
    enveloping_dim_numeric,
    mblockdiag_dim_numeric,
    variety_dim_formulas,
)
from .verdicts import to_jsonable

EXIT_OK, EXIT_USAGE, EXIT_NOT_UNITARY, EXIT_NO_DECOMPOSITION = 0, 2, 3, 4

# class each generator's output is expected to belong to
LABELS = {
    "product": "aut",
    "block_diag_A": "block_diag_A",
    "block_diag_B": "block_diag_B",
    "const": "const",
    "circulant": "block_diag_B",
    "both_block": "block_diag_AB",
    "eb_example": "cppt",
}


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("UNICLASS_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"UNICLASS_SEED must be an integer, got {raw!r}")


def _tol(args) -> Tolerances:
    return Tolerances(eq_tol=args.eq_tol, spec_tol=args.spec_tol)


def _emit(obj) -> None:
    json.dump(to_jsonable(obj), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_operator(path: str) -> BipartiteOperator:
    try:
        with open(path) as fh:
            data = json.load(fh)
        return BipartiteOperator.from_dict(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read operator from {path}: {exc}")


# generate ------------------------------------------------------------------

def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.generator == "counterexample":
        examples = named_examples(seed)
        if args.name not in examples:
            raise UsageError(f"unknown counterexample {args.name!r}; choose from {sorted(examples)}")
        op = examples[args.name]
        meta = {"generator": "counterexample", "name": args.name}
    else:
        if args.n is None:
            raise UsageError("--n is required")
        if args.generator == "const" and args.r is not None:
            op = const_unitary(args.n, args.r, seed)
        else:
            if args.k is None:
                raise UsageError("--k is required")
            params = {} if args.p is None else {"p": args.p}
            try:
                op = GENERATORS[args.generator](args.n, args.k, seed=seed, **params)
            except TypeError:
                raise UsageError(f"generator {args.generator!r} does not take these parameters")
            except ValueError as exc:
                raise UsageError(str(exc))
        meta = {"generator": args.generator, "seed": seed, "prng": PRNG_NAME}
    payload = dict(op.to_dict(), meta=meta)
    if args.out:
        Path(args.out).write_text(json.dumps(payload))
    else:
        _emit(payload)
    _note(f"{meta['generator']}: shape (n={op.n}, k={op.k})")
    return EXIT_OK


# classify ------------------------------------------------------------------

def cmd_classify(args) -> int:
    op = _load_operator(args.input)
    seed = args.seed if args.seed is not None else _default_seed()
    report = classify_all(op, _tol(args), args.budget, seed=seed,
                          checks=args.checks, strict=False)
    out = report.to_dict()
    out["violations"] = report.violations()
    _emit(out)
    _note(" ".join(f"{name}={v.value}" for name, v in report.verdicts.items()))
    return EXIT_OK


# blocksvd ------------------------------------------------------------------

def cmd_blocksvd(args) -> int:
    op = _load_operator(args.input)
    tol = _tol(args)
    target = op if args.side == "A" else swap_factors(op)
    try:
        d = canonicalize(compute_block_svd(target, tol), tol)
    except NotBlockDiagonalError as exc:
        _emit({"side": args.side, "block_svd": None, "witness": exc.witness})
        w = exc.witness or {}
        _note(f"no block SVD: {w.get('family')} family, {w.get('kind')} at {w.get('indices')}")
        return EXIT_NO_DECOMPOSITION
    _emit({"side": args.side, "block_svd": d.to_dict(), "terms": len(d)})
    _note(f"block SVD on side {args.side}: {len(d)} terms")
    return EXIT_OK


# dimension -----------------------------------------------------------------

def cmd_dimension(args) -> int:
    tol = _tol(args)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.mode == "formulas":
        _emit(variety_dim_formulas(args.n, args.k).to_dict())
        return EXIT_OK
    if args.mode == "mblockdiag":
        numeric = mblockdiag_dim_numeric(args.n, args.k, seed, tol)
        analytic = variety_dim_formulas(args.n, args.k).dim_M_block_diag_A
        report = DimensionReport(analytic, numeric, {"n": args.n, "k": args.k, "seed": seed})
    else:
        if args.input:
            op = _load_operator(args.input)
            blocks = block_coefficients(op, tol)
            params = {"input": args.input}
        elif args.point == "product":
            op = GENERATORS["product"](args.n, args.k, seed=seed)
            blocks = block_coefficients(op, tol)
            params = {"point": "product", "seed": seed}
        else:
            sample = sample_block_diag_A(args.n, args.k, args.p, seed)
            op, blocks = sample.operator, sample.blocks
            params = {"point": "block_diag_A", "p": args.p, "seed": seed}
        report = DimensionReport(enveloping_dim_analytic(blocks, tol),
                                 enveloping_dim_numeric(op, tol),
                                 dict(params, n=op.n, k=op.k))
    _emit(report.to_dict())
    _note(f"{args.mode}: analytic {report.analytic}, numeric {report.numeric}")
    return EXIT_OK


# study ---------------------------------------------------------------------

@dataclass
class StudySpec:
    shapes: list
    generators: list
    samples_per_cell: int
    seed: int = 0
    checks: list | None = None
    budget: int = 8
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "StudySpec":
        try:
            shapes = [tuple(int(x) for x in s) for s in data["shapes"]]
            gens = []
            for g in data["generators"]:
                if isinstance(g, str):
                    gens.append({"name": g, "params": {}})
                else:
                    gens.append({"name": g["name"], "params": dict(g.get("params", {}))})
            spec = cls(shapes, gens, int(data["samples_per_cell"]), int(data.get("seed", 0)),
                       data.get("checks"), int(data.get("budget", 8)))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid study spec: {exc}")
        if not spec.shapes or any(len(s) != 2 or min(s) < 1 for s in spec.shapes):
            raise UsageError("shapes must be a nonempty list of positive (n, k) pairs")
        if spec.samples_per_cell < 1:
            raise UsageError("samples_per_cell must be at least 1")
        for g in spec.generators:
            if g["name"] not in GENERATORS:
                raise UsageError(f"unknown generator {g['name']!r}")
        if spec.checks is not None:
            bad = set(spec.checks) - set(CLASS_NAMES)
            if bad:
                raise UsageError(f"unknown checks {sorted(bad)}")
        return spec


def _sample_seed(seed: int, cell: int, i: int) -> int:
    return (seed * 1_000_003 + cell * 10_007 + i) % 2**64


def _run_cell(task):
    index, n, k, gen, spec_dict, tol = task
    spec = StudySpec(**spec_dict)
    name, params = gen["name"], gen["params"]
    row = {"cell": index, "n": n, "k": k, "generator": name,
           "params": json.dumps(params, sort_keys=True), "samples": 0,
           "status": "ok", "violations": 0, "label_failures": 0}
    counts = {c: {"yes": 0, "no": 0, "unknown": 0} for c in (spec.checks or CLASS_NAMES)}
    rules: dict[str, int] = {}
    label = LABELS.get(name)
    for i in range(spec.samples_per_cell):
        try:
            op = GENERATORS[name](n, k, seed=_sample_seed(spec.seed, index, i), **params)
        except ValueError as exc:
            row["status"] = ("unavailable: dimension obstruction" if name == "const"
                             else f"unavailable: {exc}")
            break
        checks = None if spec.checks is None else sorted(set(spec.checks) | ({label} if label else set()))
        report = classify_all(op, tol, spec.budget, seed=i, checks=checks, strict=False)
        row["samples"] += 1
        for c, v in report.verdicts.items():
            if c in counts:
                counts[c][v.value.value] += 1
        for r in consistency_violations(report):
            rules[r] = rules.get(r, 0) + 1
            row["violations"] += 1
        if label and report.value(label) != "yes":
            row["label_failures"] += 1
    for c, cnt in counts.items():
        for val, num in cnt.items():
            row[f"{c}:{val}"] = num
    return row, rules


def run_study(spec: StudySpec, tol: Tolerances, jobs: int = 1) -> dict:
    """Classify seeded samples for every (shape, generator) cell."""
    spec_dict = {"shapes": spec.shapes, "generators": spec.generators,
                 "samples_per_cell": spec.samples_per_cell, "seed": spec.seed,
                 "checks": spec.checks, "budget": spec.budget}
    tasks = []
    for n, k in spec.shapes:
        for gen in spec.generators:
            tasks.append((len(tasks), n, k, gen, spec_dict, tol))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]
    rows = [r for r, _ in results]
    rules: dict[str, int] = {}
    for _, rr in results:
        for name, num in rr.items():
            rules[name] = rules.get(name, 0) + num
    return {
        "seed": spec.seed,
        "prng": PRNG_NAME,
        "cells": rows,
        "total_samples": sum(r["samples"] for r in rows),
        "total_violations": sum(r["violations"] for r in rows),
        "total_label_failures": sum(r["label_failures"] for r in rows),
        "violated_rules": rules,
    }


def cmd_study(args) -> int:
    try:
        data = json.loads(Path(args.spec).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read study spec: {exc}")
    spec = StudySpec.from_dict(data)
    if args.budget is not None:
        spec.budget = args.budget
    summary = run_study(spec, _tol(args), args.jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = summary["cells"]
    fields = list(dict.fromkeys(key for r in rows for key in r))
    with open(out_dir / f"{args.name}.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    (out_dir / f"{args.name}.json").write_text(json.dumps(summary, indent=2))
    _emit(summary)
    _note(f"{summary['total_samples']} samples, {summary['total_violations']} violations, "
          f"{summary['total_label_failures']} label failures")
    return EXIT_OK


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eq-tol", type=float, default=Tolerances().eq_tol)
    common.add_argument("--spec-tol", type=float, default=Tolerances().spec_tol)
    common.add_argument("--budget", type=int, default=None,
                        help="restarts for the mixed-unitary search (default 8)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed (default: $UNICLASS_SEED or 0)")

    parser = argparse.ArgumentParser(
        prog="uniclass", description="Classify bipartite unitaries by the channels they induce."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a seeded operator as JSON")
    g.add_argument("generator", choices=sorted(GENERATORS) + ["counterexample"])
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--p", type=int, help="number of distinct blocks")
    g.add_argument("--r", type=int, help="for const: k = n * r")
    g.add_argument("--name", help="counterexample name")
    g.add_argument("-o", "--out", help="output path (default stdout)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("classify", parents=[common], help="classify an operator file")
    c.add_argument("input")
    c.add_argument("--checks", nargs="+", choices=CLASS_NAMES)
    c.set_defaults(func=cmd_classify)

    b = sub.add_parser("blocksvd", parents=[common], help="block SVD of an operator file")
    b.add_argument("input")
    b.add_argument("--side", choices=["A", "B"], default="A")
    b.set_defaults(func=cmd_blocksvd)

    d = sub.add_parser("dimension", parents=[common], help="dimension counts")
    d.add_argument("mode", choices=["enveloping", "formulas", "mblockdiag"])
    d.add_argument("--n", type=int)
    d.add_argument("--k", type=int)
    d.add_argument("--p", type=int)
    d.add_argument("--point", choices=["block_diag_A", "product"], default="block_diag_A")
    d.add_argument("--input", help="operator file (enveloping mode)")
    d.set_defaults(func=cmd_dimension)

    s = sub.add_parser("study", parents=[common], help="batch classification study")
    s.add_argument("spec", metavar="STUDY_JSON", help="study description file")
    s.add_argument("--out-dir", default=".")
    s.add_argument("--name", default="study", help="basename of the CSV and JSON outputs")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget", None) is None and args.command != "study":
        args.budget = 8
    try:
        needs_shape = not (args.mode == "enveloping" and args.input) if args.command == "dimension" else False
        if needs_shape and (args.n is None or args.k is None):
            raise UsageError("--n and --k are required")
        return args.func(args)
    except UsageError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except NotUnitaryError as exc:
        _note(f"error: {exc}")
        return EXIT_NOT_UNITARY
    except NotUnitalMemberError as exc:
        _note(f"error: {exc}")
        return EXIT_NOT_UNITARY
    except NotBlockDiagonalError as exc:
        _note(f"error: {exc}")
        return EXIT_NO_DECOMPOSITION
    except (DimensionError, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
