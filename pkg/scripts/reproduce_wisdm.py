"""Full-scale check on the WISDM v1.1 transformed feature file.

Download ``WISDM_ar_v1.1_transformed.arff`` from the WISDM lab site, then

    python3 scripts/reproduce_wisdm.py path/to/WISDM_ar_v1.1_transformed.arff --out wisdm_run

The ARFF is converted to the preprocessed CSV layout, the identifier column
and every column holding missing or non-numeric values are dropped, users
with fewer than 5 instances of a class they performed are removed, and the
RF mixed-model cell is run for 20 repetitions at epsilon 0.05. Published
reference values: coverage 95.43 and mean set size 1.22.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from conformal_multiuser import harness

REFERENCE_COVERAGE = 95.43
REFERENCE_SETSIZE = 1.22
COVERAGE_TOL = 2.0
SETSIZE_TOL = 0.3


def read_arff(path) -> pd.DataFrame:
    names, rows, in_data = [], [], False
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if low.startswith("@attribute"):
                names.append(line.split(None, 2)[1].strip("\"'"))
            elif low.startswith("@data"):
                in_data = True
            elif in_data:
                rows.append([v.strip().strip("\"'") for v in line.split(",")])
    frame = pd.DataFrame([r for r in rows if len(r) == len(names)], columns=names)
    return frame.replace("?", np.nan)


def to_preprocessed(frame: pd.DataFrame) -> pd.DataFrame:
    cols = {c.lower(): c for c in frame.columns}
    out = pd.DataFrame({"user": frame[cols["user"]].astype(str), "class": frame[cols["class"]].astype(str)})
    for c in frame.columns:
        if c.lower() in ("user", "class", "unique_id"):
            continue
        values = pd.to_numeric(frame[c], errors="coerce")
        if values.isna().any():
            continue
        out[c] = values.to_numpy(dtype=float)
    return out


def reproduce(arff, out_dir, repetitions: int = 20) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "wisdm.csv"
    to_preprocessed(read_arff(arff)).to_csv(csv_path, index=False, float_format="%.17g")
    cfg = harness.parse_config(
        {
            "output": str(out_dir / "run"),
            "repetitions": repetitions,
            "datasets": [{"name": "wisdm", "path": str(csv_path)}],
            "classifiers": ["rf"],
            "strategies": ["MM"],
            "viz": {"boxplot": False, "lolliplot": False},
        },
        base_dir=out_dir,
    )
    harness.run_experiment(cfg)
    reps = harness.read_reps(Path(cfg.output) / "wisdm_rf_MM_reps.csv")
    coverage = 100.0 * float(np.mean([r.coverage for r in reps]))
    setsize = float(np.mean([r.setsize for r in reps]))
    return {
        "coverage": coverage,
        "setsize": setsize,
        "coverage_ok": abs(coverage - REFERENCE_COVERAGE) <= COVERAGE_TOL,
        "setsize_ok": abs(setsize - REFERENCE_SETSIZE) <= SETSIZE_TOL,
    }


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("arff")
    p.add_argument("--out", default="wisdm_run")
    p.add_argument("--repetitions", type=int, default=20)
    args = p.parse_args(argv)
    res = reproduce(args.arff, args.out, args.repetitions)
    print(f"RF MM coverage {res['coverage']:.2f} (reference {REFERENCE_COVERAGE} ± {COVERAGE_TOL})")
    print(f"RF MM setsize  {res['setsize']:.2f} (reference {REFERENCE_SETSIZE} ± {SETSIZE_TOL})")
    return 0 if res["coverage_ok"] and res["setsize_ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
