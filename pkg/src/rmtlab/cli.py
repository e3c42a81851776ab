"""Command line entry point: ``rmtlab <kind> --config <path.json> ...``."""
from __future__ import annotations

import argparse
import json
import sys
import time
import traceback

from .errors import RmtLabError
from .harness.config import KINDS, ExperimentConfig
from .harness.experiments import RUNNERS
from .harness.io import build_manifest, write_results
from .harness.suite import verify_suite

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmtlab", description="Moments of the logarithmic derivative of "
                                "SO(2N+1) characteristic polynomials: sampling, quadrature and checks.")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", help="JSON experiment config (a manifest.json is accepted too)")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--workers", type=int, help="worker processes for Monte Carlo")
    p.add_argument("--out", help="output directory")
    p.add_argument("--quick", action="store_true", help="reduced grids")
    return p


def load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
    data["kind"] = args.kind
    for key in ("seed", "workers", "out"):
        if getattr(args, key) is not None:
            data[key] = getattr(args, key)
    if args.quick:
        data["quick"] = True
    return ExperimentConfig.from_dict(data)


def run(cfg: ExperimentConfig, argv=()) -> int:
    started = time.time()
    if cfg.kind == "full-suite":
        res = verify_suite(quick=cfg.quick, seed=cfg.seed, workers=cfg.workers)
        rows, summary, ok = res.rows, res.summary(), res.passed
    else:
        rows = RUNNERS[cfg.kind](cfg)
        ok = all(r.verdict != "fail" for r in rows)
        summary = {"rows": len(rows), "failed": sum(r.verdict == "fail" for r in rows),
                   "indeterminate": sum(r.verdict == "indeterminate" for r in rows)}
        for r in rows:
            print(f"{r.verdict:13} {r.check}  N={r.N} a={r.a} K={r.K}  residual={r.residual}  budget={r.budget}")
    manifest = build_manifest(cfg, argv, started, time.time(), summary)
    out = write_results(cfg.out, rows, manifest)
    print(f"wrote {out / 'results.csv'} ({len(rows)} rows)")
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return run(cfg, argv)
    except (RmtLabError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"rmtlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
