#!/usr/bin/env python3
"""Convert the Electricity and Person Activity datasets into qhtree streams.

Usage:
    prepare_uci.py --electricity elecNormNew.arff --person ConfLongDemo_JSI.txt --out DIR

Writes DIR/{electricity,person}.{csv,json}. Rows keep the order of the
source files. Numeric columns are min-max scaled to [-1, 1]; categorical
values and labels keep their source spelling and are mapped by the schema.
Only the standard library is used.
"""

import argparse
import csv
import json
import os


def scale(columns):
    out = []
    for col in columns:
        lo, hi = min(col), max(col)
        span = hi - lo
        out.append([0.0 if span == 0 else 2.0 * (v - lo) / span - 1.0 for v in col])
    return out


def write(out_dir, name, attrs, numeric_cols, rows_cat, labels, label_names):
    numeric = scale(numeric_cols)
    schema = {"attributes": attrs, "labels": len(label_names), "label_names": label_names}
    with open(os.path.join(out_dir, name + ".json"), "w") as f:
        json.dump(schema, f, indent=2)
    with open(os.path.join(out_dir, name + ".csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([a["name"] for a in attrs] + ["label"])
        n_idx = c_idx = 0
        kinds = [a["kind"] for a in attrs]
        for i, label in enumerate(labels):
            row, n_idx, c_idx = [], 0, 0
            for kind in kinds:
                if kind == "numeric":
                    row.append(repr(numeric[n_idx][i]))
                    n_idx += 1
                else:
                    row.append(rows_cat[c_idx][i])
                    c_idx += 1
            row.append(label)
            w.writerow(row)
    print(f"{name}: {len(labels)} rows, {len(attrs)} attributes, {len(label_names)} labels")


def electricity(path, out_dir):
    names, rows, in_data = [], [], False
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if low.startswith("@attribute"):
                names.append(line.split()[1].strip("'\""))
            elif low.startswith("@data"):
                in_data = True
            elif in_data:
                rows.append([v.strip().strip("'\"") for v in line.split(",")])
    idx = {n.lower(): i for i, n in enumerate(names)}
    numeric_names = ["date", "period", "nswprice", "nswdemand", "vicprice", "vicdemand", "transfer"]
    attrs, numeric_cols = [], []
    for n in numeric_names:
        attrs.append({"name": n, "kind": "numeric"})
        numeric_cols.append([float(r[idx[n]]) for r in rows])
    days = sorted({r[idx["day"]] for r in rows}, key=lambda d: float(d))
    attrs.insert(1, {"name": "day", "kind": "categorical", "values": len(days), "categories": days})
    labels = [r[idx["class"]] for r in rows]
    write(out_dir, "electricity", attrs, numeric_cols, [[r[idx["day"]] for r in rows]], labels, sorted(set(labels)))


def person(path, out_dir):
    rows = []
    with open(path) as f:
        for rec in csv.reader(f):
            if len(rec) == 8:
                rows.append([v.strip() for v in rec])
    seqs = sorted({r[0] for r in rows})
    tags = sorted({r[1] for r in rows})
    attrs = [
        {"name": "sequence", "kind": "categorical", "values": len(seqs), "categories": seqs},
        {"name": "tag", "kind": "categorical", "values": len(tags), "categories": tags},
        {"name": "x", "kind": "numeric"},
        {"name": "y", "kind": "numeric"},
        {"name": "z", "kind": "numeric"},
    ]
    numeric_cols = [[float(r[k]) for r in rows] for k in (4, 5, 6)]
    labels = [r[7] for r in rows]
    write(out_dir, "person", attrs, numeric_cols, [[r[0] for r in rows], [r[1] for r in rows]], labels, sorted(set(labels)))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--electricity", help="electricity ARFF (normalized variant, 45312 rows)")
    ap.add_argument("--person", help="ConfLongDemo_JSI.txt from the Person Activity dataset")
    ap.add_argument("--out", required=True)
    a = ap.parse_args()
    os.makedirs(a.out, exist_ok=True)
    if a.electricity:
        electricity(a.electricity, a.out)
    if a.person:
        person(a.person, a.out)


if __name__ == "__main__":
    main()
