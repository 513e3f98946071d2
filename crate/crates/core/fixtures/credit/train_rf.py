"""Train the credit-approval random forest fixture and export it.

Produces, next to this script:
  schema.json   attribute/class schema
  credit.csv    690 rows with __label__ and __split__ (75/25, stratified)
  rf200.json    200-tree, depth <= 10 random forest in the JSON interchange format

A leaf floor of 5 samples gives 6,810 leaves, the closest of floors 1-5 to
the 7,085-rule forest this fixture stands in for.

Input is the Statlog "Australian credit approval" table (australian.dat,
14 attributes + class, comma separated). Attribute names follow the usual
semantic labelling of the anonymised columns.

Usage: python3 train_rf.py [--seed 0] [--min-samples-leaf 5]
"""
import argparse
import json
import os

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.model_selection import train_test_split

HERE = os.path.dirname(os.path.abspath(__file__))

# (name, kind)
ATTRS = [
    ("Gender", "categorical"),
    ("Age", "numeric"),
    ("Debt", "numeric"),
    ("Married", "categorical"),
    ("Industry", "categorical"),
    ("Ethnicity", "categorical"),
    ("YearsEmployed", "numeric"),
    ("PriorDefault", "categorical"),
    ("Employed", "categorical"),
    ("CreditScore", "numeric"),
    ("DriversLicense", "categorical"),
    ("Citizen", "categorical"),
    ("ZipCode", "numeric"),
    ("Income", "numeric"),
]
CLASSES = ["Rejected", "Approved"]


def category_name(attr, code):
    return f"{attr}_{int(code)}"


def export_tree(est, cat_levels):
    t = est.tree_
    nodes = []
    for i in range(t.node_count):
        left, right = int(t.children_left[i]), int(t.children_right[i])
        if left == -1:
            counts = (t.value[i][0] * t.weighted_n_node_samples[i]).tolist()
            nodes.append({"leaf": [round(c, 6) for c in counts]})
            continue
        f = int(t.feature[i])
        thr = float(t.threshold[i])
        if ATTRS[f][1] == "categorical":
            levels = cat_levels[f]
            left_idx = [k for k, v in enumerate(levels) if v <= thr]
            nodes.append({"attr": f, "kind": "categorical", "categories": left_idx,
                          "left": left, "right": right})
        else:
            nodes.append({"attr": f, "kind": "numeric", "threshold": thr,
                          "left": left, "right": right})
    return {"target_class": None, "nodes": nodes}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-samples-leaf", type=int, default=5)
    args = ap.parse_args()

    data = np.loadtxt(os.path.join(HERE, "australian.dat"), delimiter=",")
    x, y = data[:, :14], data[:, 14].astype(int)

    cat_levels = {}
    attrs = []
    for j, (name, kind) in enumerate(ATTRS):
        spec = {"name": name, "kind": kind}
        if kind == "categorical":
            levels = sorted(np.unique(x[:, j]).tolist())
            cat_levels[j] = levels
            spec["categories"] = [category_name(name, v) for v in levels]
        attrs.append(spec)

    # Categorical columns are re-coded to category indices before training so
    # that threshold splits become contiguous category subsets.
    x_coded = x.copy()
    for j, levels in cat_levels.items():
        x_coded[:, j] = [levels.index(v) for v in x[:, j]]
    coded_levels = {j: list(range(len(v))) for j, v in cat_levels.items()}

    idx = np.arange(len(y))
    tr, te = train_test_split(idx, test_size=0.25, random_state=args.seed, stratify=y)
    rf = RandomForestClassifier(
        n_estimators=200,
        max_depth=10,
        min_samples_leaf=args.min_samples_leaf,
        random_state=args.seed,
    )
    rf.fit(x_coded[tr], y[tr])
    print("test accuracy", rf.score(x_coded[te], y[te]))

    with open(os.path.join(HERE, "schema.json"), "w") as fh:
        json.dump({"attributes": attrs, "classes": CLASSES}, fh, indent=2)

    split = np.array(["train"] * len(y), dtype=object)
    split[te] = "test"
    with open(os.path.join(HERE, "credit.csv"), "w") as fh:
        fh.write(",".join([a for a, _ in ATTRS] + ["__label__", "__split__"]) + "\n")
        for i in range(len(y)):
            row = []
            for j, (name, kind) in enumerate(ATTRS):
                v = x[i, j]
                row.append(category_name(name, v) if kind == "categorical" else repr(float(v)))
            row += [CLASSES[y[i]], split[i]]
            fh.write(",".join(row) + "\n")

    model = {
        "model_kind": "random_forest",
        "base_scores": [],
        "trees": [export_tree(est, coded_levels) for est in rf.estimators_],
    }
    with open(os.path.join(HERE, "rf200.json"), "w") as fh:
        json.dump(model, fh, separators=(",", ":"))
    n_leaves = sum(est.tree_.n_leaves for est in rf.estimators_)
    print("leaves", n_leaves)


if __name__ == "__main__":
    main()
