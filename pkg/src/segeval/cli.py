"""Batch command line: pair evaluation, cohort runs, method comparison,
and phantom generation.

Exit codes: 0 success, 2 validation problems (bad flags, incompatible
grids, invalid geometry, empty manifest, unknown methods), 3 file I/O
or parse failures.  Reports are deterministic for identical inputs and
flags; pass --no-timestamp to drop the one non-reproducible field.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError, ManifestError, ValidationError
from .grid import LabelSelector, extract_mask, mask_to_volume
from .nifti import read_nifti, write_nifti
from .phantom import dilate_ball, flip_noise, gen_box, gen_ellipsoid, translate, volume_mm3
from .reporting import (
    build_report,
    comparison_to_dict,
    evaluate_pair,
    load_records,
    make_metadata,
    records_to_csv,
    render_sentence,
    report_to_json,
)
from .stats import MetricRecord, cohort_compare

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


@dataclass(frozen=True)
class ManifestRow:
    case_id: str
    role: str  # "reference" | "method:<name>" | "rater:<id>:<session>"
    path: Path


def parse_manifest(path) -> list[ManifestRow]:
    """Load the cohort manifest CSV; paths resolve against its directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    required = {"case_id", "role", "path"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ManifestError(f"manifest {path} must carry columns case_id,role,path")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        case_id = (row["case_id"] or "").strip()
        role = (row["role"] or "").strip()
        rel = (row["path"] or "").strip()
        if not case_id or not role or not rel:
            raise ManifestError(f"manifest {path} line {lineno}: empty field")
        if role != "reference":
            parts = role.split(":")
            if not (
                (parts[0] == "method" and len(parts) == 2 and parts[1])
                or (parts[0] == "rater" and len(parts) == 3 and parts[1] and parts[2])
            ):
                raise ManifestError(f"manifest {path} line {lineno}: bad role {role!r}")
        rows.append(ManifestRow(case_id, role, path.parent / rel))
    if not rows:
        raise ManifestError(f"manifest {path} holds no rows")
    return rows


def _selector_from_args(args) -> LabelSelector:
    if getattr(args, "label", None) is not None:
        return LabelSelector.exact_label(args.label)
    if getattr(args, "threshold", None) is not None:
        return LabelSelector.threshold(args.threshold)
    return LabelSelector.threshold(0.5)  # plain 0/1 masks


def _load_mask(path, selector: LabelSelector):
    return extract_mask(read_nifti(path), selector)


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


def cmd_pair(args) -> int:
    selector = _selector_from_args(args)
    ref = _load_mask(args.ref, selector)
    test = _load_mask(args.test, selector)
    metrics, warnings = evaluate_pair(ref, test)
    records = [
        MetricRecord("pair", "test", name, float(value)) for name, value in metrics.items()
    ]
    metadata = make_metadata(
        "pair",
        timestamp=not args.no_timestamp,
        reference=str(args.ref),
        test=str(args.test),
        selector=selector.describe(),
        ref_volume_mm3=volume_mm3(ref),
        test_volume_mm3=volume_mm3(test),
    )
    report = build_report(metadata, records, warnings=warnings)
    if args.format == "json":
        _emit(report_to_json(report), args.out)
    else:
        _emit(records_to_csv(records), args.out)
    return EXIT_OK


def cmd_cohort(args) -> int:
    rows = parse_manifest(args.manifest)
    selector = _selector_from_args(args)

    cases: dict[str, dict] = {}
    for row in rows:
        entry = cases.setdefault(row.case_id, {"reference": [], "methods": []})
        if row.role == "reference":
            entry["reference"].append(row.path)
        elif row.role.startswith("method:"):
            entry["methods"].append((row.role.split(":", 1)[1], row.path))
        # rater rows are valid manifest content but not part of a cohort run

    records: list[MetricRecord] = []
    warnings: list[str] = []
    n_evaluated = 0
    n_failed = 0
    for case_id in sorted(cases):
        entry = cases[case_id]
        if len(entry["reference"]) != 1:
            warnings.append(
                f"case {case_id}: expected exactly one reference row, "
                f"found {len(entry['reference'])}; case skipped"
            )
            n_failed += 1
            continue
        if not entry["methods"]:
            warnings.append(f"case {case_id}: no method rows; case skipped")
            n_failed += 1
            continue
        try:
            ref = _load_mask(entry["reference"][0], selector)
        except (FormatError, ValidationError) as exc:
            warnings.append(f"case {case_id}: reference unusable: {exc}")
            n_failed += 1
            continue
        case_ok = False
        for method, path in sorted(entry["methods"]):
            try:
                test = _load_mask(path, selector)
                metrics, pair_warnings = evaluate_pair(ref, test)
            except (FormatError, ValidationError) as exc:
                warnings.append(f"case {case_id}, method {method}: {exc}")
                continue
            for note in pair_warnings:
                warnings.append(f"case {case_id}, method {method}: {note}")
            records.extend(
                MetricRecord(case_id, method, name, float(value))
                for name, value in metrics.items()
            )
            case_ok = True
        if case_ok:
            n_evaluated += 1
        else:
            n_failed += 1

    if n_evaluated == 0:
        for w in warnings:
            print(w, file=sys.stderr)
        print("cohort: no case could be evaluated", file=sys.stderr)
        return EXIT_IO

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    metadata = make_metadata(
        "cohort",
        timestamp=not args.no_timestamp,
        manifest=str(args.manifest),
        selector=selector.describe(),
        n_cases_evaluated=n_evaluated,
        n_cases_failed=n_failed,
    )
    if args.format == "json":
        report = build_report(metadata, records, warnings=warnings)
        (out_dir / "report.json").write_text(report_to_json(report))
    else:
        (out_dir / "records.csv").write_text(records_to_csv(records))
    for w in warnings:
        print(w, file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    records = load_records(args.records)
    methods = {r.method for r in records}
    for name in (args.method_a, args.method_b):
        if name not in methods:
            raise ValidationError(
                f"method {name!r} absent from records (methods present: "
                f"{', '.join(sorted(methods))})"
            )
    rows = cohort_compare(records, args.method_a, args.method_b)

    comparisons = []
    warnings = []
    for row in rows:
        comparisons.append(comparison_to_dict(row, args.method_a, args.method_b))
        if row.n_unpaired:
            warnings.append(f"metric {row.metric}: {row.n_unpaired} unpaired case(s) dropped")
        print(render_sentence(row, args.method_a, args.method_b))

    metadata = make_metadata(
        "compare",
        timestamp=not args.no_timestamp,
        records_source=str(args.records),
        method_a=args.method_a,
        method_b=args.method_b,
    )
    report = build_report(metadata, [], comparisons=comparisons, warnings=warnings)
    if args.out is not None:
        Path(args.out).write_text(report_to_json(report))
    return EXIT_OK


def cmd_phantom(args) -> int:
    spacing = tuple(args.spacing) if getattr(args, "spacing", None) else (1.0, 1.0, 1.0)
    if args.phantom_kind == "box":
        mask = gen_box(tuple(args.dims), spacing, tuple(args.lo), tuple(args.hi))
    elif args.phantom_kind == "ellipsoid":
        mask = gen_ellipsoid(tuple(args.dims), spacing, tuple(args.center), tuple(args.radii))
    else:  # derive
        selector = _selector_from_args(args)
        mask = _load_mask(args.input, selector)
        # fixed derivation order: translate, then dilate, then noise
        if args.translate is not None:
            mask = translate(mask, tuple(args.translate))
        if args.dilate is not None:
            mask = dilate_ball(mask, args.dilate)
        if args.noise is not None:
            mask = flip_noise(mask, args.noise, args.seed)
    write_nifti(mask_to_volume(mask), args.out)
    return EXIT_OK


def _add_selector_flags(parser, required: bool) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--label", type=int, help="keep voxels equal to this integer label")
    group.add_argument("--threshold", type=float, help="keep voxels >= this value")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segeval",
        description="Overlap and surface-distance evaluation of 3D segmentation masks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pair = sub.add_parser("pair", help="evaluate one (reference, test) mask pair")
    pair.add_argument("--ref", required=True, help="reference (manual) mask file")
    pair.add_argument("--test", required=True, help="test (automated) mask file")
    _add_selector_flags(pair, required=True)
    pair.add_argument("--out", default=None, help="output file (default: stdout)")
    pair.add_argument("--format", choices=("json", "csv"), default="json")
    pair.add_argument("--no-timestamp", action="store_true")
    pair.set_defaults(func=cmd_pair)

    cohort = sub.add_parser("cohort", help="evaluate every case of a manifest")
    cohort.add_argument("--manifest", required=True, help="CSV with case_id,role,path")
    cohort.add_argument("--out", required=True, help="output directory")
    cohort.add_argument("--format", choices=("json", "csv"), default="json")
    _add_selector_flags(cohort, required=False)
    cohort.add_argument("--no-timestamp", action="store_true")
    cohort.set_defaults(func=cmd_cohort)

    compare = sub.add_parser("compare", help="compare two methods over cohort records")
    compare.add_argument("--records", required=True, help="report.json or records.csv")
    compare.add_argument("--method-a", required=True)
    compare.add_argument("--method-b", required=True)
    compare.add_argument("--out", default=None, help="write the comparison report here")
    compare.add_argument("--no-timestamp", action="store_true")
    compare.set_defaults(func=cmd_compare)

    phantom = sub.add_parser("phantom", help="generate or perturb synthetic masks")
    kinds = phantom.add_subparsers(dest="phantom_kind", required=True)

    box = kinds.add_parser("box", help="axis-aligned solid box")
    box.add_argument("--dims", type=int, nargs=3, required=True, metavar=("NX", "NY", "NZ"))
    box.add_argument("--spacing", type=float, nargs=3, metavar=("SX", "SY", "SZ"))
    box.add_argument("--lo", type=int, nargs=3, required=True, metavar=("X", "Y", "Z"))
    box.add_argument("--hi", type=int, nargs=3, required=True, metavar=("X", "Y", "Z"))
    box.add_argument("--out", required=True)
    box.set_defaults(func=cmd_phantom)

    ell = kinds.add_parser("ellipsoid", help="solid ellipsoid with mm radii")
    ell.add_argument("--dims", type=int, nargs=3, required=True, metavar=("NX", "NY", "NZ"))
    ell.add_argument("--spacing", type=float, nargs=3, metavar=("SX", "SY", "SZ"))
    ell.add_argument("--center", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    ell.add_argument("--radii", type=float, nargs=3, required=True, metavar=("RX", "RY", "RZ"))
    ell.add_argument("--out", required=True)
    ell.set_defaults(func=cmd_phantom)

    derive = kinds.add_parser(
        "derive", help="translate / dilate / add noise to an existing mask"
    )
    derive.add_argument("--input", required=True)
    _add_selector_flags(derive, required=False)
    derive.add_argument("--translate", type=int, nargs=3, metavar=("DX", "DY", "DZ"))
    derive.add_argument("--dilate", type=float, metavar="R_VOX")
    derive.add_argument("--noise", type=float, metavar="RATE")
    derive.add_argument("--seed", type=int, default=0)
    derive.add_argument("--out", required=True)
    derive.set_defaults(func=cmd_phantom)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"segeval: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FormatError, OSError) as exc:
        print(f"segeval: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())
