#!/usr/bin/env python3
"""Regenerate the example scenario files under scenarios/.

The ad scenario is drawn from the seeded generator; everything else is
written out by hand.  Output is deterministic.
"""
from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from growthlab import generators

ROOT = Path(__file__).resolve().parent.parent / "scenarios"


def lv(levels: dict) -> dict:
    return {"levels": {str(k): v for k, v in levels.items()}}


def cantor() -> dict:
    return {"kind": "cantor", "payload": {"tasks": [
        {"name": "two cylinders", "op": "measure", "set": [{"0": 1}, {"1": 1}], "expect": "3/4"},
        {"name": "full set", "op": "measure", "set": [{}], "expect": "1/1"},
        {"name": "irrelevant coordinate", "op": "support",
         "set": [{"0": 1, "1": 0}, {"0": 1, "1": 1}], "expect": [0]},
        {"name": "product rule", "op": "product", "a": [{"0": 1}], "b": [{"1": 0, "2": 1}],
         "expect": "1/8"},
    ]}}


def density() -> dict:
    chain = [{"mod": 2 ** k, "residues": [r for r in range(2 ** k) if r != 2 ** k - 1] if k > 1 else [0]}
             for k in range(1, 7)]
    return {"kind": "density", "payload": {"tasks": [
        {"name": "odd numbers", "op": "density", "set": {"mod": 4, "residues": [1, 3]}, "expect": "1/2"},
        {"name": "cylinder [01]", "op": "transfer", "a": [{"0": 0, "1": 1}], "b": [{"2": 1}]},
        {"name": "staged union to density 1", "op": "buck_union", "chain": chain, "supremum": "1",
         "budget": 4, "probes": [1, 10, 100, 1000, 100000]},
    ]}}


def ad() -> dict:
    rng = random.Random("scenario:ad")
    s = generators.scenario(rng, 2, 5, ad_bound=4)
    return {"kind": "ad", "payload": {"tasks": [
        {"name": "residual above the bound", "op": "lower_bound", "scenario": s.to_json(),
         "alphas": ["a0", "a1"], "tau": {"0": 1}},
        {"name": "block 2 of a0 is a neighbourhood", "op": "contains", "scenario": s.to_json(),
         "alpha": "a0", "n": 2},
        {"name": "nonempty truncation", "op": "emptiness", "scenario": s.to_json(),
         "C": [{}], "betas": ["a0"], "alphas": ["a1"], "depth": 3, "expect": "nonempty"},
    ]}}


def slalom_cl2() -> dict:
    vs = [lv({3: [0]}), lv({3: [1], 4: [2, 3]}), lv({4: [0, 5]}), lv({3: [7]})]
    return {"kind": "slalom", "seed": 7, "payload": {"tasks": [
        {"name": "class height", "op": "w_delta_class", "W": lv({1: [0], 2: [1, 2]}),
         "delta": "3/4", "expect": 3},
        {"name": "avoidance measure", "op": "a_w_measure", "W": lv({2: [0], 3: [1, 2]}), "n": 2,
         "expect": "9/16"},
        {"name": "explicit class", "op": "cl2", "vs": vs, "delta": "1/2"},
        {"name": "seeded classes", "op": "cl2_random", "count": 20, "delta": "1/2", "k": 6},
        {"name": "union is finite", "op": "decide",
         "expr": {"and": [{"posT": lv({1: [0]})}, {"posT": lv({1: [1]})}]}, "expect": False},
        {"name": "height with a gap", "op": "decide",
         "expr": {"and": [{"height": {"S": lv({1: [0]}), "n": 2}},
                          {"not": {"posT": lv({2: [3]})}}]}, "expect": True},
        {"name": "diagonal", "op": "diagonal", "wns": [lv({1: [0]}), lv({2: [0, 1, 2]})], "H": 4},
    ]}}


def kelley() -> dict:
    tri = {"atoms": ["ab", "bc", "ca"], "sets": [["ab", "ca"], ["ab", "bc"], ["bc", "ca"]]}
    disjoint = {"atoms": ["x", "y"], "sets": [["x"], ["y"]]}
    return {"kind": "kelley", "payload": {"tasks": [
        {"name": "triangle", "op": "kappa", "family": tri, "expect": "2/3"},
        {"name": "two disjoint sets", "op": "kappa", "family": disjoint, "expect": "1/2"},
        {"name": "above one half", "op": "fragmentation", "families": [tri], "delta": "1/2"},
    ]}}


def bell_taylor() -> dict:
    return {"kind": "bell", "payload": {"tasks": [
        {"name": "m=1 n=4", "op": "taylor", "m": 1, "n": 4},
        {"name": "m=5 n=16", "op": "taylor", "m": 5, "n": 16},
        {"name": "outside the range", "op": "taylor", "m": 10, "n": 2, "expect": False},
        {"name": "grid 3m < n ≤ 60", "op": "taylor_grid", "m_max": 5, "n_max": 60},
    ]}}


def bell_iso() -> dict:
    pi = {"rows": [[1], [1, 0], [1, 0, 2], [1, 0, 2, 3]]}
    other = {"rows": [[0], [0, 2], [0, 2, 1], [0, 2, 1, 4]]}
    return {"kind": "bell", "payload": {"tasks": [
        {"name": "depth-2 mass", "op": "measure", "nodes": [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]],
         "expect": "1/1"},
        {"name": "truncated V", "op": "v_trunc", "pi": pi, "H": 2},
        {"name": "positive and negative", "op": "iso", "pos": [pi], "neg": [other], "H": 3},
        {"name": "negative only", "op": "iso", "pos": [], "neg": [pi], "H": 3, "s": [1]},
        {"name": "positivity below (0)", "op": "positivity", "s": [0], "pis": [pi], "n": 4},
    ]}}


def broken() -> dict:
    return {"kind": "slalom", "payload": {"tasks": [
        {"op": "decide", "expr": {"posT": {"levels": {"2": ["a"]}}}},
    ]}}


FILES = {
    "cantor.json": cantor, "density.json": density, "ad.json": ad,
    "slalom-cl2.json": slalom_cl2, "kelley.json": kelley, "bell-taylor.json": bell_taylor,
    "bell-iso.json": bell_iso, "broken.json": broken,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--dir", type=Path, default=ROOT)
    args = ap.parse_args()
    args.dir.mkdir(parents=True, exist_ok=True)
    for name, build in FILES.items():
        (args.dir / name).write_text(json.dumps(build(), indent=2, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
        print(args.dir / name)


if __name__ == "__main__":
    main()
