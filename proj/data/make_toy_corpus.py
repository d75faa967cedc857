#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The ssbd Authors
"""Generates the toy English->French parallel corpus used by the demos.

Target determiners agree with the noun's gender and adjectives follow the
noun, so a streaming translator must revise early target words once the
noun arrives.
"""

import argparse
import random

NOUNS = {"cat": ("chat", "m"), "dog": ("chien", "m"), "house": ("maison", "f"),
         "car": ("voiture", "f"), "bird": ("oiseau", "m"), "door": ("porte", "f")}
ADJS = {"black": ("noir", "noire"), "small": ("petit", "petite"),
        "green": ("vert", "verte"), "old": ("vieux", "vieille")}
VERBS = {"sees": "voit", "likes": "aime", "follows": "suit"}
DETS = {"the": ("le", "la"), "a": ("un", "une")}


def phrase(rng):
    det = rng.choice(sorted(DETS))
    noun = rng.choice(sorted(NOUNS))
    adj = rng.choice(sorted(ADJS)) if rng.random() < 0.5 else None
    fr_noun, gender = NOUNS[noun]
    g = 0 if gender == "m" else 1
    src = [det] + ([adj] if adj else []) + [noun]
    tgt = [DETS[det][g], fr_noun] + ([ADJS[adj][g]] if adj else [])
    return src, tgt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--train", type=int, default=400)
    ap.add_argument("--test", type=int, default=20)
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()
    rng = random.Random(args.seed)

    def sentence():
        s1, t1 = phrase(rng)
        s2, t2 = phrase(rng)
        verb = rng.choice(sorted(VERBS))
        return s1 + [verb] + s2 + ["."], t1 + [VERBS[verb]] + t2 + ["."]

    with open(f"{args.out_dir}/parallel.txt", "w") as f:
        for _ in range(args.train):
            src, tgt = sentence()
            f.write(" ".join(src + ["<sep>"] + tgt) + "\n")
    with open(f"{args.out_dir}/source.txt", "w") as f:
        for _ in range(args.test):
            src, _ = sentence()
            f.write(" ".join(src) + "\n")


if __name__ == "__main__":
    main()
