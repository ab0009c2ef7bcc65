#!/usr/bin/env python3
# Copyright 2026 The teleclass Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the synthetic end-to-end fixture under tests/data/synthetic.

Fifteen classes on three levels, 200 training and 100 test documents.
Every class c owns a unit direction e_c; a document on the path
(l1, l2[, l3]) gets a shared offset plus weighted path directions and
Gaussian noise. Term and name vectors sit near their class direction.
The mock backend rules plant each document's core class and each class's
keywords.

Run from the repository root:  python3 tests/data/make_synthetic.py
"""

import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent / "synthetic"
DIM = 64
SEED = 20261016
N_TRAIN = 200
N_TEST = 100
Q = 5

# name, parent
CLASSES = [
    ("beauty", None),
    ("electronics", None),
    ("outdoors", None),
    ("hair care", "beauty"),
    ("skin care", "beauty"),
    ("audio", "electronics"),
    ("cameras", "electronics"),
    ("camping", "outdoors"),
    ("cycling", "outdoors"),
    ("shampoo", "hair care"),
    ("conditioner", "hair care"),
    ("hair dye", "hair care"),
    ("headphones", "audio"),
    ("speakers", "audio"),
    ("helmets", "cycling"),
]

# keywords the mock backend hands out for a class
LLM_TERMS = {
    "beauty": ["cosmetic", "glamour", "makeup"],
    "electronics": ["gadget", "device", "electronic"],
    "outdoors": ["outdoor", "wilderness", "nature"],
    "hair care": ["haircare", "tresses", "scalp"],
    "skin care": ["skincare", "moisturizer", "complexion"],
    "audio": ["sound", "acoustic", "stereo"],
    "cameras": ["camera", "lens", "photography"],
    "camping": ["tent", "campsite", "sleeping bag"],
    "cycling": ["bike", "bicycle", "pedal"],
    "shampoo": ["lather", "suds", "cleansing"],
    "conditioner": ["detangling", "softening", "smoothing"],
    "hair dye": ["coloring", "tint", "highlights"],
    "headphones": ["earcups", "headset", "earbuds"],
    "speakers": ["woofer", "subwoofer", "loudspeaker"],
    "helmets": ["helmet", "headgear", "visor"],
}

# class words that only the corpus knows about
CORPUS_TERMS = {
    "beauty": ["pampering", "vanity"],
    "electronics": ["circuitry", "charger"],
    "outdoors": ["trail", "backcountry"],
    "hair care": ["strands", "frizz"],
    "skin care": ["pores", "serum"],
    "audio": ["bass", "treble"],
    "cameras": ["shutter", "autofocus"],
    "camping": ["lantern", "firewood"],
    "cycling": ["gears", "saddle"],
    "shampoo": ["foam", "rinse"],
    "conditioner": ["silky", "leave in"],
    "hair dye": ["roots", "pigment"],
    "headphones": ["earpads", "noise cancelling"],
    "speakers": ["bookshelf", "tweeter"],
    "helmets": ["chinstrap", "impact"],
}

FILLER = (
    "the a this it is was and for with my very great good product item bought "
    "arrived quality price really would again use works well after days week "
    "nice love recommend five stars value package seller fast shipping"
).split()

PATH_WEIGHT = [1.0, 0.7, 0.45]  # leaf first
COMMON_WEIGHT = 0.35
DOC_NOISE = 0.06
TERM_NOISE = 0.12


def paths(classes):
    parent = dict(classes)
    kids = {}
    for name, p in classes:
        kids.setdefault(p, []).append(name)
    out = []
    for leaf, _ in classes:
        if leaf in kids:
            continue
        path = [leaf]
        while parent[path[0]] is not None:
            path.insert(0, parent[path[0]])
        out.append(path)
    return sorted(out)


def unit(v):
    return v / np.linalg.norm(v)


def fmt_vec(v):
    return [float(f"{x:.6g}") for x in v]


def main():
    rng = np.random.default_rng(SEED)
    names = [n for n, _ in CLASSES]
    ids = {n: i for i, n in enumerate(names)}
    basis, _ = np.linalg.qr(rng.standard_normal((DIM, len(names) + 1)))
    e = {n: basis[:, i] for i, n in enumerate(names)}
    common = basis[:, len(names)]
    all_paths = paths(CLASSES)

    def doc_vector(path):
        v = COMMON_WEIGHT * common
        for k, c in enumerate(reversed(path)):
            v = v + PATH_WEIGHT[k] * e[c]
        v = v + DOC_NOISE * rng.standard_normal(DIM)
        return unit(v)

    def doc_text(path):
        words = []
        for c in path:
            pool = LLM_TERMS[c] + CORPUS_TERMS[c]
            words += list(rng.choice(pool, size=2, replace=False))
        if rng.random() < 0.5:
            words.append(path[-1])
        words += list(rng.choice(FILLER, size=10))
        rng.shuffle(words)
        return " ".join(words)

    def make_docs(prefix, n):
        docs = []
        for i in range(n):
            path = all_paths[i % len(all_paths)] if i < len(all_paths) else all_paths[
                rng.integers(len(all_paths))]
            docs.append((f"{prefix}{i:03d}", path, doc_text(path), doc_vector(path)))
        return docs

    train = make_docs("d", N_TRAIN)
    test = make_docs("t", N_TEST)

    OUT.mkdir(parents=True, exist_ok=True)
    taxonomy = {
        "nodes": [{"id": i, "name": n} for i, n in enumerate(names)],
        "edges": [[ids[p], ids[n]] for n, p in CLASSES if p is not None],
    }
    (OUT / "taxonomy.json").write_text(json.dumps(taxonomy, indent=1) + "\n")

    def write_jsonl(name, rows):
        (OUT / name).write_text("".join(json.dumps(r) + "\n" for r in rows))

    write_jsonl("corpus.jsonl", [{"id": d, "text": t} for d, _, t, _ in train])
    write_jsonl("test_corpus.jsonl", [{"id": d, "text": t} for d, _, t, _ in test])
    write_jsonl("gold.jsonl", [{"id": d, "labels": p} for d, p, _, _ in test])

    rules = {
        "doc_labels": {d: [p[-1]] for d, p, _, _ in train},
        "class_terms": LLM_TERMS,
    }
    (OUT / "mock_rules.json").write_text(json.dumps(rules, indent=1, sort_keys=True) + "\n")

    records = []
    for d, _, _, v in train + test:
        records.append({"key": f"doc:{d}", "vector": fmt_vec(v)})
    for n in names:
        records.append({"key": f"name:{n}", "vector": fmt_vec(unit(e[n] + TERM_NOISE * rng.standard_normal(DIM)))})
    terms = {}
    for n in names:
        for t in [n] + LLM_TERMS[n] + CORPUS_TERMS[n]:
            terms[t] = unit(e[n] + TERM_NOISE * rng.standard_normal(DIM))
    for t in sorted(terms):
        records.append({"key": f"term:{t}", "vector": fmt_vec(terms[t])})
    write_jsonl("vectors.jsonl", records)

    gen = []
    for path in all_paths:
        for i in range(Q):
            gen.append({"key": f"doc:gen:{'/'.join(path)}:{i}", "vector": fmt_vec(doc_vector(path))})
    write_jsonl("generated_vectors.jsonl", gen)


if __name__ == "__main__":
    main()
