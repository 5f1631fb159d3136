"""Command-line front end: ``quantawed {table,clone,nogo,epr}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .channels import (
    MarriageMillSpec,
    clone_ensemble,
    mandel_clone,
    wrong_polarization_probability,
)
from .ensembles import TwoLightKind, ensemble_density, one_light, two_light
from .epr import STRATEGIES, ProtocolConfig, run_protocol
from .measurement import ensemble_stats, sample_stats
from .nogo import build_residuals, on_manifold, probability_deficit, solve_constraint_family
from .states import basis_state

SCHEMA_VERSION = 1
DEFAULT_SEED = 2008
DEFAULT_TRIALS = 100_000

# (HH, VV, HV) rows of the beamsplitter table, as integer ratios, and R
REFERENCE_TABLE = {
    "PUP2": ((1, 1, 1), 2.0),
    "CUP2": ((1, 1, 1), 2.0),
    "FPUP": ((1, 1, 2), 1.0),
    "FCUP": ((3, 3, 2), 3.0),
}


def _emit(doc: dict, fmt: str, csv_rows: list[list] | None = None, header=None) -> str:
    if fmt == "json":
        return json.dumps({"schema_version": SCHEMA_VERSION, **doc}, indent=2)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in csv_rows if csv_rows is not None else _flatten(doc):
        w.writerow(row)
    return buf.getvalue().rstrip("\n")


def _flatten(doc, prefix=""):
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list) and v and isinstance(v[0], (list, dict)):
            yield [key, json.dumps(v)]
        elif isinstance(v, list):
            yield [key, *v]
        else:
            yield [key, v]


def table_report(trials: int | None = None, seed: int = DEFAULT_SEED) -> dict:
    rows = []
    ok = True
    rng = np.random.SeedSequence(seed).spawn(len(TwoLightKind))
    for kind, ss in zip(TwoLightKind, rng):
        stats = ensemble_stats(two_light(kind))
        ratio = stats.integer_ratio()
        row = {
            "kind": kind.value,
            "p_HH": stats.p_HH,
            "p_VV": stats.p_VV,
            "p_HV": stats.p_HV,
            "R": stats.ratio_R,
            "ratio": list(ratio),
        }
        want_ratio, want_r = REFERENCE_TABLE[kind.value]
        ok &= tuple(ratio) == want_ratio and abs(stats.ratio_R - want_r) < 1e-12
        if trials:
            counts = sample_stats(two_light(kind), trials, ss)
            freq = counts.normalized()
            row["sampled"] = {
                "n": trials, "p_HH": freq.p_HH, "p_VV": freq.p_VV, "p_HV": freq.p_HV,
                "R": freq.ratio_R,
            }
        rows.append(row)
    return {"command": "table", "rows": rows, "matches_reference_table": bool(ok)}


def cmd_table(args) -> int:
    rep = table_report(args.trials, args.seed)
    if args.format == "json":
        print(_emit(rep, "json"))
    else:
        header = ["kind", "p_HH", "p_VV", "p_HV", "R", "ratio"]
        if args.trials:
            header += ["mc_p_HH", "mc_p_VV", "mc_p_HV", "mc_R"]
        out = []
        for r in rep["rows"]:
            line = [r["kind"], r["p_HH"], r["p_VV"], r["p_HV"], r["R"], ":".join(map(str, r["ratio"]))]
            if args.trials:
                s = r["sampled"]
                line += [s["p_HH"], s["p_VV"], s["p_HV"], s["R"]]
            out.append(line)
        print(_emit(rep, "csv", out, header))
    return 0 if rep["matches_reference_table"] else 1


def clone_report(trials: int, seed: int) -> dict:
    per_input = {x: wrong_polarization_probability(basis_state(x)) for x in "HVRL"}
    plane = ensemble_density(clone_ensemble(one_light("plane")))
    circ = ensemble_density(clone_ensemble(one_light("circular")))
    diff = float(np.linalg.norm(plane - circ))
    # every pure input clones into (2/3)|ZZ> + (1/3)|ZZ#>; sample the H input
    rng = np.random.default_rng(seed)
    out = mandel_clone(basis_state("H").density())
    p_wrong = float(np.real(out[1, 1]))
    wrong = int(rng.binomial(trials, p_wrong))
    sampled = wrong / trials
    sigma = float(np.sqrt(p_wrong * (1 - p_wrong) / trials))
    ok = all(abs(v - 1 / 3) < 1e-12 for v in per_input.values()) and diff < 1e-12
    return {
        "command": "clone",
        "wrong_fraction_analytic": p_wrong,
        "wrong_fraction_by_input": per_input,
        "wrong_fraction_sampled": sampled,
        "trials": trials,
        "seed": seed,
        "sampled_sigma": sigma,
        "sampled_within_3sigma": abs(sampled - p_wrong) <= 3 * sigma,
        "pup_cup_density_difference": diff,
        "assertions_hold": bool(ok),
    }


def cmd_clone(args) -> int:
    rep = clone_report(args.trials, args.seed)
    print(_emit(rep, args.format))
    return 0 if rep["assertions_hold"] else 1


def nogo_report(spec: MarriageMillSpec | None) -> dict:
    if spec is None:
        fam = solve_constraint_family()
        return {
            "command": "nogo",
            "family": fam.to_dict(),
            "ratio": fam.ratio,
            "deficit": fam.deficit,
            "text": fam.text(),
            "assertions_hold": abs(fam.ratio - 0.5) < 1e-10 and abs(fam.deficit - 0.5) < 1e-12,
        }
    rep = build_residuals(spec)
    on = on_manifold(spec)
    doc = {
        "command": "nogo",
        "spec": spec.to_record(),
        "residual": rep.to_dict(),
        "residual_norm": rep.norm,
        "on_manifold": on,
        "admissible": spec.admissible(),
        "text": rep.text(),
        "assertions_hold": True,
    }
    if on:
        doc["deficit"] = probability_deficit(spec) if abs(rep.A_S) <= 1 else None
    return doc


def cmd_nogo(args) -> int:
    if args.template:
        spec = MarriageMillSpec.canonical() if args.template == "canonical" else MarriageMillSpec.perfect()
        print(json.dumps(spec.to_record(), indent=2))
        return 0
    spec = None
    if args.spec:
        try:
            spec = MarriageMillSpec.load(args.spec)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    rep = nogo_report(spec)
    if args.format == "text":
        print(rep["text"])
        if spec is not None:
            print("verdict: " + ("on-manifold" if rep["on_manifold"] else "off-manifold"))
    else:
        doc = {k: v for k, v in rep.items() if k != "text"}
        print(_emit(doc, args.format))
    return 0 if rep["assertions_hold"] else 1


def epr_report(strategy: str, trials: int, seed: int, bob_basis: str, mill=None) -> dict:
    cfg = ProtocolConfig(trials, strategy, seed=seed, bob_basis=bob_basis, mill=mill)
    rec = run_protocol(cfg)
    doc = rec.to_dict()
    a = rec.analytic
    if a["tv_sigma"] is None:
        consistent = not rec.signaling
    else:
        consistent = abs(rec.tv_distance - a["tv_distance"]) <= 3 * a["tv_sigma"]
    doc["command"] = "epr"
    doc["consistent_with_analytic"] = bool(consistent)
    return doc


def cmd_epr(args) -> int:
    mill = None
    if args.spec:
        try:
            mill = MarriageMillSpec.load(args.spec)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        doc = epr_report(args.strategy, args.trials, args.seed, args.bob_basis, mill)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(_emit(doc, args.format))
    print(f"verdict: {doc['verdict']}", file=sys.stderr)
    return 0 if doc["consistent_with_analytic"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantawed",
        description="Photon cloning, quantum-wedding and EPR no-signaling simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"base random seed (default {DEFAULT_SEED})")
        p.add_argument("--trials", type=_positive, default=trials_default,
                       help=f"Monte Carlo sample size (default {trials_default})")

    p = sub.add_parser("table", help="H/V beamsplitter table of the four two-light types")
    common(p, None)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("clone", help="optimal cloner statistics")
    common(p, DEFAULT_TRIALS)
    p.set_defaults(func=cmd_clone)

    p = sub.add_parser("nogo", help="linearity residuals and the admissible mill family")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--spec", help="mill spec JSON file to check")
    p.add_argument("--template", choices=["canonical", "perfect"],
                   help="print a mill spec JSON file and exit")
    p.set_defaults(func=cmd_nogo)

    p = sub.add_parser("epr", help="Alice/Bob basis-signaling experiment")
    common(p, DEFAULT_TRIALS)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--bob-basis", choices=["plane", "circular"], default="plane",
                   help="analyzer basis for the direct strategy")
    p.add_argument("--spec", help="mill spec JSON file for --strategy wed")
    p.set_defaults(func=cmd_epr)
    return parser


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
