#!/usr/bin/env python3
"""Structural counts of every reference diagram in a dataset.

    python3 scripts/corpus_stats.py [--dataset DIR] [--csv]
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from archeval.harness import dataset_stats, load_dataset

ROOT = Path(__file__).resolve().parents[1]
COLUMNS = ("case_id", "node_count", "max_depth", "container_count", "relation_count", "top_layer_count")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="per-case structural statistics")
    ap.add_argument("--dataset", type=Path, default=ROOT / "tests" / "fixtures" / "dataset")
    ap.add_argument("--csv", action="store_true", help="CSV instead of an aligned table")
    args = ap.parse_args(argv)

    rows = [s.to_dict() for s in dataset_stats(load_dataset(args.dataset))]
    if args.csv:
        w = csv.DictWriter(sys.stdout, COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return 0
    width = max(len(r["case_id"]) for r in rows) if rows else 7
    print(f"{'case_id':<{width}}  " + "  ".join(f"{c[:-6] if c.endswith('_count') else c:>10}" for c in COLUMNS[1:]))
    for r in rows:
        print(f"{r['case_id']:<{width}}  " + "  ".join(f"{r[c]:>10}" for c in COLUMNS[1:]))
    if rows:
        totals = {c: sum(r[c] for r in rows) / len(rows) for c in COLUMNS[1:]}
        print(f"{'mean':<{width}}  " + "  ".join(f"{totals[c]:>10.2f}" for c in COLUMNS[1:]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
