"""Command line entry point: ``pssl run|sweep|audit|vc``.

Exit codes: 0 success, 2 configuration error, 3 resource error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .concepts import ConceptClass, vc_dimension
from .errors import ConfigError, DomainError, PSSLError, ResourceError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pssl", description="Private semi-supervised learning experiments")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to a JSON config (or inline JSON for 'vc')")
    common.add_argument("--seed", type=int, help="override the root seed")
    common.add_argument("--trials", type=int, help="override the trial count")
    common.add_argument("--out-dir", type=Path, help="directory for CSV/JSON reports")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    common.add_argument("--summary", action="store_true", help="print an aligned text table")
    common.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("run", parents=[common], help="run seeded trials of one learner")
    sub.add_parser("sweep", parents=[common], help="sample-complexity curve over one parameter")
    sub.add_parser("audit", parents=[common], help="empirical privacy audit")
    sub.add_parser("vc", parents=[common], help="VC dimension of a concept class spec")
    return p


def _load(arg: str) -> tuple[dict, Path | None]:
    if arg.lstrip().startswith("{"):
        try:
            return json.loads(arg), None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"inline spec is not valid JSON: {exc}") from exc
    path = Path(arg)
    return harness.load_json(path), path.parent


def _experiment(args) -> harness.ExperimentConfig:
    raw, base = _load(args.config)
    if args.seed is not None:
        raw["root_seed"] = args.seed
    if args.trials is not None:
        raw["trials"] = args.trials
    cfg = harness.ExperimentConfig.from_dict(raw, base)
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    return cfg


def _emit(cfg_dir: Path | None, files: dict[str, str]) -> None:
    if cfg_dir is None:
        return
    for path in harness.write_outputs(cfg_dir, files):
        print(f"wrote {path}")


def cmd_run(args) -> int:
    cfg = _experiment(args)
    rep = harness.run_experiment(cfg, threads=args.threads)
    agg = rep.aggregate()
    _emit(cfg.out_dir, {f"{cfg.name}.csv": harness.trial_csv([rep]),
                        f"{cfg.name}.json": json.dumps(agg, indent=2) + "\n"})
    if args.summary:
        print(harness.summary_table(harness.TRIAL_COLUMNS, rep.rows()))
    print(f"failure fraction {rep.failure_fraction:.4f} over {len(rep.trials)} trials "
          f"(mean error {rep.mean_error:.4f})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _experiment(args)
    if cfg.sweep_axis is None:
        raise ConfigError("sweep needs a 'sweep' section with an axis and values")
    curve = harness.sample_complexity_curve(cfg, threads=args.threads)
    agg = {"axis": curve.axis, "points": [r.aggregate() for r in curve.reports], "bounds": curve.bounds}
    _emit(cfg.out_dir, {f"{cfg.name}_trials.csv": harness.trial_csv(curve.reports),
                        f"{cfg.name}_curve.csv": curve.csv(),
                        f"{cfg.name}.json": json.dumps(agg, indent=2, default=str) + "\n"})
    if args.summary:
        print(harness.summary_table(harness.CURVE_COLUMNS, curve.rows()))
    print(f"{len(curve.reports)} sweep points")
    return EXIT_OK


def cmd_audit(args) -> int:
    raw, base = _load(args.config)
    reports = harness.run_audits(raw, base, seed=args.seed, trials=args.trials)
    out_dir = args.out_dir
    if out_dir is None and "output" in raw and "dir" in raw["output"]:
        out_dir = Path(raw["output"]["dir"]) if base is None else base / raw["output"]["dir"]
    name = raw.get("output", {}).get("name", "audit")
    _emit(out_dir, {f"{name}.csv": harness.audit_csv(reports),
                    f"{name}.json": json.dumps([r.to_json() for r in reports], indent=2) + "\n"})
    header = ["mechanism", "pair_id", "epsilon_hat", "epsilon_point", "ci_method", "ci_level", "trials", "seed"]
    rows = [[harness.fmt(x) for x in r.csv_row()] for r in reports]
    print(harness.summary_table(header, rows) if args.summary else "\n".join(",".join(r) for r in rows))
    return EXIT_OK


def cmd_vc(args) -> int:
    raw, base = _load(args.config)
    spec = raw.get("concept_class", raw)
    klass = ConceptClass.from_spec(spec, base)
    out = {"class": klass.class_id, "cardinality": len(klass), "vc": vc_dimension(klass)}
    if raw.get("xor", False):
        out["vc_xor"] = vc_dimension(ConceptClass.xor_of(klass))
    print(json.dumps(out))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "audit": cmd_audit, "vc": cmd_vc}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except PSSLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
