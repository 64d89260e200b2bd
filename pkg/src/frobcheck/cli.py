"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 parse error, 4 an asserted
residual above tolerance.  Usage errors exit through argparse with status 2.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .correlators import check_condition_C1, check_condition_C2
from .errors import FrobeniusError, ParseError, ValidationFailed
from .frobenius import validate_spec
from .g2 import JetPoint, appendixA_components
from .identities import check_all
from .registry import ADE_TABLE, ade_weights, certify_conditions, dimension_count, is_ade, is_asserted, load_manifold
from .report import Document
from .rotation import rotation_data
from .sampling import random_signs, sample_frames, sample_points_and_jets

EXIT_OK, EXIT_VALIDATION, EXIT_PARSE, EXIT_RESIDUAL = 0, 2, 3, 4


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _tolerance(text: str) -> tuple[str, float]:
    name, _, value = text.partition("=")
    if not value:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    return name, _positive_float(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frobcheck", description="Numerical checks of genus-2 vanishing identities.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, num_points=10):
        sp.add_argument("--manifold", required=True, help="builtin name or manifold spec file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--num-points", type=_positive_int, default=num_points)
        sp.add_argument("--box", type=_positive_float, default=0.1, help="sampling polydisc radius")
        sp.add_argument("--precision", choices=("double", "dd"), default="double")
        sp.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
        sp.add_argument("--format", choices=("table", "json"), default="json")
        sp.add_argument("--output", type=Path, help="write the report here instead of stdout")
        sp.add_argument("--workers", type=_positive_int, default=1, help="processes for the sample sweep")

    common(sub.add_parser("validate", help="validate a manifold spec"))
    g = sub.add_parser("g2", help="vanishing combinations of the genus-2 G-function")
    common(g, 20)
    g.add_argument("--h-mode", choices=("definition", "reduced"), default="definition")
    g.add_argument("--branch-flip", action="store_true", help="also evaluate with a random h sign assignment")
    i = sub.add_parser("identities", help="identity suite")
    common(i)
    i.add_argument("--only", help="comma-separated identity names or prefixes")
    i.add_argument("--branch-flip", action="store_true")
    c = sub.add_parser("conditions", help="conditions C1, C2 and the dimension-count certificate")
    common(c)
    c.add_argument("--dimension-only", action="store_true")
    c.add_argument("--s-max", type=_positive_int, default=12)
    c.add_argument("--desc-max", type=int, default=2)
    return p


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("output", "workers")}
    cfg["tol"] = {k: v for k, v in args.tol}
    return cfg


# -- sweeps (module-level so worker processes can pickle them) -----------------------------


def _g2_sample(job):
    spec, sample, jets, h_mode, signs = job
    if signs is not None:
        jets = JetPoint(sample.frame.with_signs(signs), jets.ux, jets.uxx)
    rep = appendixA_components(rotation_data(spec, jets.frame), jets, h_mode)
    return rep.max_combo_residuals(), rep.total, rep.scales["total"]


def _identity_sample(job):
    spec, sample, asserted, tol, signs = job
    frame = sample.frame if signs is None else sample.frame.with_signs(signs)
    return check_all(spec, frame, asserted, tol, sample.index).entries


def _map(fn, jobs, workers):
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(fn, jobs))


# -- commands -------------------------------------------------------------------------------


def cmd_validate(args) -> tuple[int, Document]:
    spec = load_manifold(args.manifold, validate=False)
    tol = dict(args.tol).get("validate", 1e-10)
    rep = validate_spec(spec, samples=args.num_points, seed=args.seed, tolerance=tol)
    doc = Document("validate", spec.name, _config(args), [], rep.as_dict())
    return (EXIT_OK if rep.passed else EXIT_VALIDATION), doc


def cmd_g2(args) -> tuple[int, Document]:
    spec = load_manifold(args.manifold)
    tol = dict(args.tol).get("g2", 1e-6)
    pairs = sample_points_and_jets(spec, args.num_points, args.seed, args.box, args.precision)
    rng = np.random.default_rng([args.seed, 2])
    jobs = [(spec, s, j, args.h_mode, None) for s, j in pairs]
    if args.branch_flip:
        jobs += [(spec, s, j, args.h_mode, random_signs(spec.nvars, rng)) for s, j in pairs]
    results = _map(_g2_sample, jobs, args.workers)
    rows, worst = [], {}
    for job, (combo, total, tscale) in zip(jobs, results):
        sample = job[1]
        row = {"sample": sample.index, "branch_flip": job[4] is not None,
               "point": list(sample.frame.point), "total": total, "total_scale": tscale}
        for name, res in combo.items():
            row[name] = res
            worst[name] = max(worst.get(name, 0.0), res)
        rows.append(row)
    asserted = is_asserted(spec)
    passed = all(v < tol for v in worst.values())
    summary = {"max_residuals": worst, "tolerance": tol, "passed": passed,
               "exploratory": not asserted, "h_mode": args.h_mode}
    code = EXIT_OK if passed or not asserted else EXIT_RESIDUAL
    return code, Document("g2", spec.name, _config(args), rows, summary)


def _selected(ident: str, only) -> bool:
    return only is None or any(ident == o or ident.startswith(o) for o in only)


def cmd_identities(args) -> tuple[int, Document]:
    spec = load_manifold(args.manifold)
    samples = sample_frames(spec, args.num_points, args.seed, args.box, args.precision)
    asserted = is_asserted(spec)
    tol = dict(args.tol)
    rng = np.random.default_rng([args.seed, 2])
    jobs = [(spec, s, asserted, tol, None) for s in samples]
    if args.branch_flip:
        jobs += [(spec, s, asserted, tol, random_signs(spec.nvars, rng)) for s in samples]
    only = [o.strip() for o in args.only.split(",")] if args.only else None
    rows = []
    for job, entries in zip(jobs, _map(_identity_sample, jobs, args.workers)):
        for e in entries:
            if _selected(e.id, only):
                rows.append({"sample": job[1].index, "branch_flip": job[4] is not None, **e.as_dict()})
    failures = [r for r in rows if r["asserted"] and not r["passed"]]
    worst = {}
    for r in rows:
        worst[r["identity"]] = max(worst.get(r["identity"], 0.0), r["residual"])
    summary = {"passed": not failures, "rows": len(rows), "failures": len(failures),
               "max_residuals": worst, "conditions_asserted": asserted}
    for r in failures:
        print(f"FAIL {r['identity']} [{r['anchor']}] pattern {r['pattern']} sample {r['sample']}: "
              f"residual {r['residual']:.3e} > {r['tolerance']:g}", file=sys.stderr)
    return (EXIT_RESIDUAL if failures else EXIT_OK), Document("identities", spec.name, _config(args), rows, summary)


def _ade_type(name: str):
    """ADE type label for an ADE builtin or a bare type name such as 'E8'."""
    if name in ADE_TABLE or (name[:1] in "ADE" and name[1:].isdigit()):
        try:
            return ade_weights(name)
        except ValueError:
            return None
    return None


def _dimension_rows(w, s_max, desc_max) -> tuple[list, dict]:
    cert = certify_conditions(w, s_max, desc_max)
    rows = []
    for g, dm in ((1, 0), (2, desc_max)):
        pats = dimension_count(w, g, s_max, dm)
        rows.append({"type": w.type, "genus": g, "desc_max": dm, "s_max": s_max,
                     "admissible": len(pats), "patterns": [p.label() for p in pats]})
    return rows, cert.as_dict()


def cmd_conditions(args) -> tuple[int, Document]:
    if args.dimension_only:
        w = _ade_type(args.manifold)
        if w is None:
            spec = load_manifold(args.manifold, validate=False)
            t = spec.metadata.get("ade")
            if t is None:
                raise ParseError(f"{args.manifold!r} is not an ADE type")
            w = ade_weights(t[0], t[1])
        rows, cert = _dimension_rows(w, args.s_max, args.desc_max)
        return EXIT_OK, Document("conditions", w.type, _config(args), rows, {"certification": cert})
    spec = load_manifold(args.manifold)
    frames = [s.frame for s in sample_frames(spec, args.num_points, args.seed, args.box, args.precision)]
    tol = dict(args.tol)
    c1 = check_condition_C1(spec, frames, spread_tol=tol.get("C1", 1e-8))
    c2 = check_condition_C2(spec, frames, tol=tol.get("C2", 1e-7))
    rows = [
        {"condition": "C1", "residual": c1.residual, "spread": c1.spread, "tolerance": c1.tolerance,
         "passed": c1.passed, "reference_value": c1.details["reference_value"]},
        {"condition": "C2", "residual": c2.residual, "spread": 0.0, "tolerance": c2.tolerance, "passed": c2.passed},
    ]
    summary = {"C1": c1.passed, "C2": c2.passed, "certification": None}
    ok = c1.passed and c2.passed
    t = spec.metadata.get("ade")
    if t is not None:
        drows, cert = _dimension_rows(ade_weights(t[0], t[1]), args.s_max, args.desc_max)
        rows += drows
        summary["certification"] = cert
        ok = ok and cert["C2_certified"] and cert["C3_certified"]
    must_pass = is_ade(spec)
    return (EXIT_RESIDUAL if must_pass and not ok else EXIT_OK), Document("conditions", spec.name, _config(args), rows, summary)


COMMANDS = {"validate": cmd_validate, "g2": cmd_g2, "identities": cmd_identities, "conditions": cmd_conditions}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, doc = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationFailed as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FrobeniusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    text = doc.render(args.format)
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
