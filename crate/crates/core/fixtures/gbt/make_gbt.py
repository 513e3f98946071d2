"""Generate small LightGBM text-dump fixtures with reference raw scores.

Writes, for a binary and a 3-class problem:
  <name>.schema.json, <name>.csv, <name>.txt (model dump), <name>.raw.json
Every fourth row is marked as a test sample. The raw file holds LightGBM's own raw scores per CSV row, used to check the
text parser and the rule vote model against the training framework.

Usage: python3 make_gbt.py
"""
import json
import os

import lightgbm as lgb
import numpy as np
import pandas as pd

HERE = os.path.dirname(os.path.abspath(__file__))
COLORS = ["red", "green", "blue", "black"]


def make(name, n_classes, seed):
    rng = np.random.default_rng(seed)
    n = 240
    x0 = rng.normal(size=n)
    x1 = rng.uniform(0, 10, size=n)
    color = rng.integers(0, len(COLORS), size=n)
    score = x0 + 0.3 * x1 + np.where(color == 2, 1.5, 0.0) - np.where(color == 0, 1.0, 0.0)
    if n_classes == 2:
        y = (score + rng.normal(scale=0.5, size=n) > 1.5).astype(int)
    else:
        y = np.digitize(score + rng.normal(scale=0.5, size=n), [0.8, 2.2])
    df = pd.DataFrame({"x0": x0, "x1": x1, "color": pd.Categorical(color, categories=range(len(COLORS)))})
    params = dict(num_leaves=6, n_estimators=12, learning_rate=0.3, min_child_samples=5,
                  min_data_per_group=5, cat_smooth=1.0, max_cat_to_onehot=1, verbose=-1,
                  random_state=seed)
    clf = lgb.LGBMClassifier(**params)
    clf.fit(df, y, categorical_feature=["color"])
    booster = clf.booster_
    booster.save_model(os.path.join(HERE, f"{name}.txt"))
    raw = clf.predict(df, raw_score=True)
    classes = [f"class{c}" for c in range(n_classes)]
    schema = {
        "attributes": [
            {"name": "x0", "kind": "numeric"},
            {"name": "x1", "kind": "numeric"},
            {"name": "color", "kind": "categorical", "categories": COLORS},
        ],
        "classes": classes,
    }
    with open(os.path.join(HERE, f"{name}.schema.json"), "w") as fh:
        json.dump(schema, fh, indent=2)
    with open(os.path.join(HERE, f"{name}.csv"), "w") as fh:
        fh.write("x0,x1,color,__label__,__split__\n")
        for i in range(n):
            split = "train" if i % 4 else "test"
            fh.write(f"{float(x0[i])!r},{float(x1[i])!r},{COLORS[color[i]]},{classes[y[i]]},{split}\n")
    with open(os.path.join(HERE, f"{name}.raw.json"), "w") as fh:
        json.dump(np.asarray(raw).tolist(), fh)


if __name__ == "__main__":
    make("binary", 2, 3)
    make("multiclass", 3, 4)
