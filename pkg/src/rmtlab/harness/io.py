"""Result rows and their CSV / JSON / manifest serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

COLUMNS = ("experiment", "check", "timestamp", "N", "a", "s", "K", "m",
           "measured", "stderr", "formula", "residual", "budget", "slope", "verdict")
FLOAT_COLUMNS = ("a", "s", "K", "measured", "stderr", "formula", "residual", "budget", "slope")


def row_timestamp() -> str:
    """Timestamp stamped on every row.

    Taken from SOURCE_DATE_EPOCH (default 0) so that the tables stay
    byte-reproducible; the wall-clock time goes into the manifest.
    """
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class ResultRow:
    experiment: str
    check: str
    verdict: str
    N: int | None = None
    a: float | None = None
    s: float | None = None
    K: float | None = None
    m: int | None = None
    measured: float | None = None
    stderr: float | None = None
    formula: float | None = None
    residual: float | None = None
    budget: float | None = None
    slope: float | None = None
    timestamp: str = ""

    def __post_init__(self):
        if not self.timestamp:
            self.timestamp = row_timestamp()
        for name in FLOAT_COLUMNS:
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, float(v))

    @classmethod
    def from_report(cls, experiment, check, rep, m=None) -> "ResultRow":
        p = rep.point
        return cls(experiment, check, rep.verdict, N=p.N if p else None, a=p.a if p else None,
                   s=p.s if p else None, K=p.K if p else None, m=m, measured=rep.measured,
                   stderr=rep.stderr, formula=rep.formula, residual=rep.residual,
                   budget=rep.budget, slope=rep.slope_diag)

    def cells(self) -> list[str]:
        return [format_cell(getattr(self, c)) for c in COLUMNS]

    def as_json(self) -> dict:
        out = {}
        for c in COLUMNS:
            v = getattr(self, c)
            out[c] = None if isinstance(v, float) and not math.isfinite(v) else v
        return out


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_results(out_dir, rows, manifest: dict) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(csv_text(rows), encoding="utf-8")
    with open(out / "results.json", "w", encoding="utf-8") as fh:
        json.dump([r.as_json() for r in rows], fh, indent=1, allow_nan=False)
        fh.write("\n")
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return out


def build_manifest(config, argv, started: float, finished: float, summary: dict) -> dict:
    from .. import __version__
    return {
        "config": config.to_dict(),
        "seed": config.seed,
        "workers": config.workers,
        "argv": list(argv),
        "code_version": __version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": _version("numpy"),
        "scipy": _version("scipy"),
        "mpmath": _version("mpmath"),
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "elapsed_seconds": round(finished - started, 3),
        "summary": summary,
        "columns": list(COLUMNS),
        "rerun": "rmtlab {} --config manifest.json --seed {} --workers {}".format(
            config.kind, config.seed, config.workers),
    }


def _version(mod):
    try:
        return __import__(mod).__version__
    except Exception:  # pragma: no cover
        return None

