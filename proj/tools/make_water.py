#!/usr/bin/env python3
"""Writes a box of randomly placed and oriented water molecules."""

import argparse
import math
import random


def rotation(rng):
    # uniform random rotation from a unit quaternion
    u1, u2, u3 = rng.random(), rng.random(), rng.random()
    a = math.sqrt(1 - u1) * math.sin(2 * math.pi * u2)
    b = math.sqrt(1 - u1) * math.cos(2 * math.pi * u2)
    c = math.sqrt(u1) * math.sin(2 * math.pi * u3)
    d = math.sqrt(u1) * math.cos(2 * math.pi * u3)
    return [
        [1 - 2 * (c * c + d * d), 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), 1 - 2 * (b * b + d * d), 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), 1 - 2 * (b * b + c * c)],
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--molecules", type=int, default=72)
    ap.add_argument("--box", type=float, default=21.0)
    ap.add_argument("--min-oo", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    r_oh, angle = 0.97, math.radians(104.5)
    local = [
        ("O", (0.0, 0.0, 0.0)),
        ("H", (r_oh, 0.0, 0.0)),
        ("H", (r_oh * math.cos(angle), r_oh * math.sin(angle), 0.0)),
    ]
    L = args.box
    oxygens = []
    atoms = []
    while len(oxygens) < args.molecules:
        o = [rng.uniform(0, L) for _ in range(3)]
        ok = True
        for p in oxygens:
            d2 = 0.0
            for k in range(3):
                dx = o[k] - p[k]
                dx -= L * round(dx / L)
                d2 += dx * dx
            if d2 < args.min_oo ** 2:
                ok = False
                break
        if not ok:
            continue
        oxygens.append(o)
        rot = rotation(rng)
        for el, x in local:
            y = [o[r] + sum(rot[r][c] * x[c] for c in range(3)) for r in range(3)]
            atoms.append((el, [v % L for v in y]))

    with open(args.output, "w") as f:
        f.write(f"{len(atoms)}\n")
        f.write(f"box {L} {L} {L} pbc 1 1 1\n")
        for el, x in atoms:
            f.write(f"{el} {x[0]:.6f} {x[1]:.6f} {x[2]:.6f}\n")


if __name__ == "__main__":
    main()
