"""Command-line front end.

Subcommands: analyze, certify, jset, orbit, counterexample, dense-pair,
validate.  Structured results go to JSON (echoing the effective config so
every figure is reproducible), point clouds to CSV.  Exit codes: 0 success,
2 a successful run whose verdict is not-hypercyclic, 64 malformed input,
1 any other error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time

import numpy as np

from . import __version__
from .counterexample import (
    DensePair,
    build_counterexample,
    find_dense_pair,
    pair_density_score,
    reproduce_theorem,
)
from .dynamics import (
    NOT_HYPERCYCLIC,
    CertifyConfig,
    DiagonalWordScan,
    WordBudget,
    delta_schedule,
    box_coverage,
    certify_hypercyclic,
    jset_score,
    orbit_sample,
)
from .errors import HypercycError, NoPairFound, ParseError
from .io import cloud_to_csv, dump_family, load_family, validate_roundtrip
from .normal_form import build_normal_form, reference_frame
from .structure import rank_condition

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_HYPERCYCLIC = 2
EXIT_USAGE = 64


def parse_complex(text: str) -> complex:
    """Accept forms like '2', '-1.5', '2+0i', '0.7-0.25i', '1j'."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise ParseError(f"cannot parse complex number from '{text}'") from exc


def _parse_vector(text: str, n: int, frame=None) -> np.ndarray:
    text = text.strip()
    m = re.fullmatch(r"e(\d+)", text)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= n:
            raise ParseError(f"basis index out of range in '{text}' (n = {n})")
        v = np.zeros(n, dtype=complex)
        v[k - 1] = 1.0
        return v
    if text in ("u0", "v0"):
        if frame is None:
            raise ParseError(f"'{text}' needs a normal form; internal error")
        return frame.u0.copy() if text == "u0" else frame.v0.copy()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"cannot parse vector '{text}': {exc}") from exc
    if not isinstance(data, list) or len(data) != n:
        raise ParseError(f"vector must be a JSON list of {n} [re, im] pairs")
    out = np.empty(n, dtype=complex)
    for i, pair in enumerate(data):
        if isinstance(pair, (int, float)):
            out[i] = complex(pair)
        elif isinstance(pair, list) and len(pair) == 2:
            out[i] = complex(pair[0], pair[1])
        else:
            raise ParseError(f"vector entry {i + 1} must be a number or [re, im]")
    return out


def _parse_targets(text: str, n: int, R: float, rng) -> np.ndarray:
    m = re.fullmatch(r"random:(\d+)", text.strip())
    if m:
        count = int(m.group(1))
        return rng.uniform(-R, R, size=(count, n)) + 1j * rng.uniform(
            -R, R, size=(count, n)
        )
    try:
        with open(text, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read targets from '{text}': {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"targets file '{text}' is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError("targets file must hold a JSON list of vectors")
    return np.vstack([_parse_vector(json.dumps(v), n) for v in data])


def _complex_str(z: complex) -> str:
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


def _vector_json(v: np.ndarray):
    return [[float(z.real), float(z.imag)] for z in v]


def _emit(report: dict, timings: dict, out_path: str | None):
    body = dict(report)
    body["timings"] = timings
    text = json.dumps(body, indent=1, sort_keys=True, default=str)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _ladder_arg(text: str) -> tuple[int, ...]:
    try:
        rungs = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ParseError(f"cannot parse ladder '{text}'") from exc
    if not rungs or any(r <= 0 for r in rungs):
        raise ParseError("ladder must be positive integers")
    return rungs


def _rung_rows(rungs):
    rows = []
    for r in rungs:
        rows.append(
            {
                "degree": r.degree,
                "min_degree": r.min_degree,
                "words": r.words,
                "min_projection_coverage": r.min_projection,
                "max_projection_coverage": r.max_projection,
                "full_coverage": r.full_coverage,
                "full_grid_h": r.full_grid_h,
                "projections": {
                    f"{i},{j}": cov for (i, j), cov in sorted(r.projections.items())
                },
            }
        )
    return rows


def _cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    family = load_family(args.input, tol_comm=args.tol_comm)
    nf = build_normal_form(family, tol_struct=args.tol_struct)
    report = rank_condition(nf)
    frame = reference_frame(nf)
    out = {
        "command": "analyze",
        "version": __version__,
        "config": {
            "input": args.input,
            "tol_comm": args.tol_comm,
            "tol_struct": args.tol_struct,
        },
        "commutation_residual": family.commutation_residual,
        "partition": list(nf.partition),
        "r": nf.r,
        "cond_P": nf.cond_P,
        "structure_residual": nf.residual,
        "block_eigenvalues": [[_complex_str(v) for v in tup] for tup in nf.block_eigs],
        "rank_condition": {
            "pass": report.ok,
            "obstruction": report.obstruction(),
            "blocks": [
                {"size": b.size, "rank": b.rank, "expected": b.rank_expected, "ok": b.ok}
                for b in report.blocks
            ],
        },
        "u0": _vector_json(frame.u0),
        "v0": _vector_json(frame.v0),
    }
    _emit(out, {"total_s": time.perf_counter() - t0}, args.out)
    return EXIT_OK


def _certify_config(args) -> CertifyConfig:
    return CertifyConfig(
        R=args.box,
        h=args.res,
        ladder=_ladder_arg(args.ladder),
        delta=args.delta,
        max_words=args.max_words,
        tol_struct=args.tol_struct,
    )


def _cmd_certify(args) -> int:
    t0 = time.perf_counter()
    family = load_family(args.input, tol_comm=args.tol_comm)
    config = _certify_config(args)
    result = certify_hypercyclic(family, config)
    out = {
        "command": "certify",
        "version": __version__,
        "config": {
            "input": args.input,
            "box": config.R,
            "res": config.h,
            "ladder": list(config.ladder),
            "delta": config.delta,
            "tol_comm": args.tol_comm,
            "tol_struct": config.tol_struct,
            "pass_projection": config.pass_projection,
            "pass_full": config.pass_full,
            "plateau_level": config.plateau_level,
            "plateau_growth": config.plateau_growth,
        },
        "verdict": result.status,
        "reason": result.reason,
        "partition": list(result.normal_form.partition),
        "rank_condition": {
            "pass": result.rank_report.ok,
            "obstruction": result.rank_report.obstruction(),
        },
        "ladder": _rung_rows(result.rungs),
        "test_vector": None
        if result.test_vector is None
        else _vector_json(result.test_vector),
    }
    _emit(out, {"total_s": time.perf_counter() - t0}, args.out)
    return EXIT_NOT_HYPERCYCLIC if result.status == NOT_HYPERCYCLIC else EXIT_OK


def _cmd_jset(args) -> int:
    t0 = time.perf_counter()
    family = load_family(args.input, tol_comm=args.tol_comm)
    frame = reference_frame(build_normal_form(family))
    x = _parse_vector(args.x, family.n, frame)
    rng = np.random.default_rng(args.seed)
    targets = _parse_targets(args.targets, family.n, args.box, rng)
    budget = WordBudget(
        max_total_degree=args.budget,
        min_total_degree=args.min_degree if args.min_degree is not None else max(
            1, args.budget // 4
        ),
        max_words=args.max_words,
        on_overflow="truncate",
    )
    scanner = DiagonalWordScan(family, budget) if family.is_diagonal else None
    deltas = delta_schedule(args.delta, args.delta_rungs)
    rows = []
    for y in targets:
        per_delta = [
            jset_score(family, x, y, d, budget, scanner=scanner) for d in deltas
        ]
        sc = per_delta[0]
        row = {
            "target": _vector_json(y),
            "score": sc.best_distance,
            "best_word": None if sc.best_word is None else list(sc.best_word.exponents),
        }
        if len(deltas) > 1:
            row["delta_schedule"] = list(deltas)
            row["scores_by_delta"] = [s.best_distance for s in per_delta]
        rows.append(row)
    scores = [r["score"] for r in rows]
    out = {
        "command": "jset",
        "version": __version__,
        "config": {
            "input": args.input,
            "x": args.x,
            "targets": args.targets,
            "delta": args.delta,
            "budget": args.budget,
            "min_degree": budget.min_total_degree,
            "box": args.box,
            "seed": args.seed,
            "tol_comm": args.tol_comm,
        },
        "scores": rows,
        "max_score": max(scores) if scores else None,
        "median_score": float(np.median(scores)) if scores else None,
    }
    _emit(out, {"total_s": time.perf_counter() - t0}, args.out)
    return EXIT_OK


def _cmd_orbit(args) -> int:
    t0 = time.perf_counter()
    family = load_family(args.input, tol_comm=args.tol_comm)
    frame = reference_frame(build_normal_form(family))
    v = _parse_vector(args.v, family.n, frame)
    budget = WordBudget(
        max_total_degree=args.budget,
        min_total_degree=args.min_degree or 0,
        max_words=args.max_words,
        on_overflow="truncate",
    )
    cloud = orbit_sample(family, v, budget)
    if args.csv:
        cloud_to_csv(cloud, args.csv)
    density = box_coverage(cloud, args.box, args.res)
    out = {
        "command": "orbit",
        "version": __version__,
        "config": {
            "input": args.input,
            "v": args.v,
            "budget": args.budget,
            "min_degree": budget.min_total_degree,
            "box": args.box,
            "res": args.res,
            "csv": args.csv,
            "tol_comm": args.tol_comm,
        },
        "points": len(cloud),
        "saturated_points": int(cloud.saturated.sum()),
        "density": {
            "cells_hit": density.cells_hit,
            "cells_total": density.cells_total,
            "coverage": density.coverage,
            "points_used": density.points_used,
        },
    }
    _emit(out, {"total_s": time.perf_counter() - t0}, args.out)
    return EXIT_OK


def _cmd_counterexample(args) -> int:
    t0 = time.perf_counter()
    a = parse_complex(args.a)
    if args.b:
        b = parse_complex(args.b)
        score = pair_density_score(a, b, args.pair_budget, args.box, args.res)
        pair = DensePair(
            a=a, b=b, density_score=score, max_exponent=args.pair_budget,
            R=args.box, h=args.res,
        )
    else:
        pair = find_dense_pair(
            a, target=args.target_coverage, K=args.pair_budget,
            R=args.box, h=args.res,
        )
    cex = build_counterexample(args.n, pair)
    if args.family_out:
        dump_family(cex.family, args.family_out)
    out = {
        "command": "counterexample",
        "version": __version__,
        "config": {
            "n": args.n,
            "a": args.a,
            "b": args.b or "searched",
            "pair_budget": args.pair_budget,
            "target_coverage": args.target_coverage,
            "box": args.box,
            "res": args.res,
            "family_out": args.family_out,
            "reproduce": args.reproduce,
            "seed": args.seed,
        },
        "a_value": _complex_str(cex.a),
        "b_value": _complex_str(cex.b),
        "pair_density_score": pair.density_score,
        "generators": args.n + 1,
    }
    if args.reproduce:
        report = reproduce_theorem(args.n, pair, seed=args.seed)
        out["reproduction"] = {
            "all_ok": report.all_ok,
            "jset_max_score": report.jset_max_score,
            "jset_threshold": report.jset_threshold,
            "certify_verdict": report.certify.status,
            "certify_reason": report.certify.reason,
            "orbit_coverage_max": report.orbit_coverage_max,
            "line_residual_max": report.line_residual_max,
            "witness_product_max": report.witness_product_max,
            "locus_ok": report.locus_ok,
        }
    _emit(out, {"total_s": time.perf_counter() - t0}, args.out)
    return EXIT_OK


def _cmd_dense_pair(args) -> int:
    t0 = time.perf_counter()
    a = parse_complex(args.a)
    pair = find_dense_pair(
        a,
        target=args.target_coverage,
        K=args.pair_budget,
        modulus_steps=args.modulus_steps,
        argument_steps=args.argument_steps,
        R=args.box,
        h=args.res,
    )
    out = {
        "command": "dense-pair",
        "version": __version__,
        "config": {
            "a": args.a,
            "target_coverage": args.target_coverage,
            "pair_budget": args.pair_budget,
            "modulus_steps": args.modulus_steps,
            "argument_steps": args.argument_steps,
            "box": args.box,
            "res": args.res,
        },
        "b": [pair.b.real, pair.b.imag],
        "b_modulus": abs(pair.b),
        "density_score": pair.density_score,
    }
    _emit(out, {"total_s": time.perf_counter() - t0}, args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    ok = validate_roundtrip(args.input)
    print(json.dumps({"command": "validate", "input": args.input, "roundtrip": ok}))
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypercyc",
        description="Structure and orbit-density analysis of commuting matrix "
        "semigroups on C^n",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="generator-set JSON file")
        p.add_argument("--out", default=None, help="write the JSON report here too")
        p.add_argument("--tol-comm", type=float, default=1e-10, dest="tol_comm")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("analyze", help="normal form and per-block rank report")
    common(p)
    p.add_argument("--tol-struct", type=float, default=1e-9, dest="tol_struct")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("certify", help="empirical hypercyclicity verdict")
    common(p)
    p.add_argument("--tol-struct", type=float, default=1e-9, dest="tol_struct")
    p.add_argument("--box", type=float, default=2.0)
    p.add_argument("--res", type=float, default=0.1)
    p.add_argument("--ladder", default="10,20,40,80")
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument("--max-words", type=int, default=None, dest="max_words")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("jset", help="extended-limit-set score table")
    common(p)
    p.add_argument("--x", required=True, help="source vector: e<k>, u0, v0 or JSON")
    p.add_argument("--targets", required=True, help="'random:N' or a JSON file")
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument(
        "--delta-rungs", type=int, default=1, dest="delta_rungs",
        help="score each target at delta / 2^t for t < rungs",
    )
    p.add_argument("--budget", type=int, required=True, help="max total degree")
    p.add_argument("--min-degree", type=int, default=None, dest="min_degree")
    p.add_argument("--box", type=float, default=2.0)
    p.add_argument("--max-words", type=int, default=None, dest="max_words")
    p.set_defaults(func=_cmd_jset)

    p = sub.add_parser("orbit", help="sample an orbit cloud, export CSV")
    common(p)
    p.add_argument("--v", required=True, help="start vector: e<k>, u0, v0 or JSON")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--min-degree", type=int, default=0, dest="min_degree")
    p.add_argument("--box", type=float, default=2.0)
    p.add_argument("--res", type=float, default=0.1)
    p.add_argument("--csv", default=None, help="point-cloud CSV path")
    p.add_argument("--max-words", type=int, default=None, dest="max_words")
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser(
        "counterexample", help="build the diagonal locally-hypercyclic family"
    )
    common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", default="2+0i")
    p.add_argument("--b", default=None, help="fix b instead of searching")
    p.add_argument("--pair-budget", type=int, default=2500, dest="pair_budget")
    p.add_argument(
        "--target-coverage", type=float, default=0.9, dest="target_coverage"
    )
    p.add_argument("--box", type=float, default=2.0)
    p.add_argument("--res", type=float, default=0.1)
    p.add_argument("--family-out", default=None, dest="family_out")
    p.add_argument("--reproduce", action="store_true")
    p.set_defaults(func=_cmd_counterexample)

    p = sub.add_parser("dense-pair", help="search b with dense power products")
    common(p, needs_input=False)
    p.add_argument("--a", default="2+0i")
    p.add_argument("--pair-budget", type=int, default=2500, dest="pair_budget")
    p.add_argument(
        "--target-coverage", type=float, default=0.9, dest="target_coverage"
    )
    p.add_argument("--modulus-steps", type=int, default=10, dest="modulus_steps")
    p.add_argument("--argument-steps", type=int, default=23, dest="argument_steps")
    p.add_argument("--box", type=float, default=2.0)
    p.add_argument("--res", type=float, default=0.1)
    p.set_defaults(func=_cmd_dense_pair)

    p = sub.add_parser("validate", help="round-trip check a generator-set file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(json.dumps({"error": "parse", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except NoPairFound as exc:
        print(
            json.dumps(
                {
                    "error": "no-pair-found",
                    "message": str(exc),
                    "best_b": [exc.best_b.real, exc.best_b.imag],
                    "best_score": exc.best_score,
                }
            ),
            file=sys.stderr,
        )
        return EXIT_ERROR
    except HypercycError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
