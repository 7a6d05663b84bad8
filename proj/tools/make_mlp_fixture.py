#!/usr/bin/env python3
"""Train a small ReLU network on a CSV dataset and write it as layer JSON.

Usage: make_mlp_fixture.py data.csv out.json [--hidden 16 16] [--epochs 400] [--seed 0]
"""
import argparse
import csv
import json

import numpy as np


def load(path, label_column):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    names = [c for c in rows[0].keys() if c != label_column]
    x = np.array([[float(r[c]) for c in names] for r in rows])
    y = np.array([float(r[label_column]) for r in rows])
    return x, y


def train(x, y, hidden, epochs, lr, seed):
    rng = np.random.default_rng(seed)
    sizes = [x.shape[1], *hidden, 1]
    ws = [rng.normal(0.0, np.sqrt(2.0 / a), size=(b, a)) for a, b in zip(sizes[:-1], sizes[1:])]
    bs = [np.zeros(b) for b in sizes[1:]]
    params = ws + bs
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    for step in range(1, epochs + 1):
        acts = [x]
        for w, b in zip(ws[:-1], bs[:-1]):
            acts.append(np.maximum(acts[-1] @ w.T + b, 0.0))
        logit = (acts[-1] @ ws[-1].T + bs[-1])[:, 0]
        p = 1.0 / (1.0 + np.exp(-logit))
        delta = ((p - y) / len(y))[:, None]
        gw, gb = [None] * len(ws), [None] * len(bs)
        for k in range(len(ws) - 1, -1, -1):
            gw[k] = delta.T @ acts[k]
            gb[k] = delta.sum(axis=0)
            if k:
                delta = (delta @ ws[k]) * (acts[k] > 0)
        for i, g in enumerate(gw + gb):
            m[i] = 0.9 * m[i] + 0.1 * g
            v[i] = 0.999 * v[i] + 0.001 * g * g
            mh = m[i] / (1 - 0.9**step)
            vh = v[i] / (1 - 0.999**step)
            params[i] -= lr * mh / (np.sqrt(vh) + 1e-8)
    acc = float(np.mean((p >= 0.5) == (y == 1)))
    return ws, bs, acc


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("data")
    ap.add_argument("out")
    ap.add_argument("--label-column", default="label")
    ap.add_argument("--hidden", type=int, nargs="*", default=[16, 16])
    ap.add_argument("--epochs", type=int, default=400)
    ap.add_argument("--lr", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    x, y = load(args.data, args.label_column)
    ws, bs, acc = train(x, y, args.hidden, args.epochs, args.lr, args.seed)
    layers = [{"w": w.tolist(), "b": b.tolist()} for w, b in zip(ws, bs)]
    with open(args.out, "w") as f:
        json.dump({"layers": layers}, f, indent=1)
    print(f"{args.out}: training accuracy {acc:.4f}")


if __name__ == "__main__":
    main()
