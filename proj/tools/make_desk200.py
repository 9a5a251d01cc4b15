#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the pinned 200-molecule desk-scale regression set.

Molecules are small ring or chain cores with up to three substituents. The
target is an additive atom-contribution score plus Gaussian noise, so it
has a dense centre and sparse tails.
"""
import argparse
import random
import re

CORES = [
    ["c", "c", "c", "c", "c", "c"],
    ["c", "c", "c", "n", "c", "c"],
    ["C", "C", "C", "C", "C", "C"],
    ["c", "c", "c", "s", "c"],
    ["C", "C", "O", "C", "C"],
]
CHAINS = ["CC", "CCC", "CCCC", "CCCCC", "CC(C)C", "CCOCC"]
SUBSTITUENTS = ["C", "CC", "O", "N", "F", "Cl", "Br", "C(=O)O", "C(=O)N", "OC",
                "C#N", "S", "CO", "I", "C(F)(F)F"]
WEIGHTS = [8, 5, 6, 5, 3, 3, 1, 3, 2, 3, 2, 1, 3, 1, 1]
CONTRIB = {"c": -0.35, "C": -0.25, "n": 0.45, "N": 0.5, "O": 0.6, "o": 0.3, "s": -0.3,
           "S": -0.4, "F": -0.3, "Cl": -0.6, "Br": -0.8, "I": -1.0}
ATOM = re.compile(r"Cl|Br|[cnos]|[CNOSFI]")


def ring_smiles(core, subs):
    out = []
    for i, atom in enumerate(core):
        out.append(atom)
        if i == 0:
            out.append("1")
        if i < len(subs) and subs[i] is not None:
            out.append("(" + subs[i] + ")")
    out.append("1")
    return "".join(out)


def molecule(rng):
    k = rng.choices([0, 1, 2, 3], weights=[2, 4, 3, 1])[0]
    picks = rng.choices(SUBSTITUENTS, weights=WEIGHTS, k=k)
    if rng.random() < 0.75:
        core = rng.choice(CORES)
        slots = [None] * len(core)
        carbons = [i for i, a in enumerate(core) if a in "cC"]
        for j, s in enumerate(picks):
            slots[carbons[(2 * j) % len(carbons)]] = s
        return ring_smiles(core, slots)
    return rng.choice(CHAINS) + "".join("(" + s + ")" for s in picks[:-1]) + \
        (picks[-1] if picks else "")


def target(smiles, rng):
    score = 1.0 + sum(CONTRIB[a] for a in ATOM.findall(smiles))
    return round(score + rng.gauss(0.0, 0.15), 3)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--count", type=int, default=200)
    parser.add_argument("out")
    args = parser.parse_args()
    rng = random.Random(args.seed)
    seen = set()
    rows = []
    while len(rows) < args.count:
        smi = molecule(rng)
        if smi in seen:
            continue
        seen.add(smi)
        rows.append((f"d{len(rows)}", smi, target(smi, rng)))
    with open(args.out, "w", newline="\n") as f:
        f.write("id,smiles,y\n")
        for row in rows:
            f.write(f"{row[0]},{row[1]},{row[2]}\n")


if __name__ == "__main__":
    main()
