"""Sweep the sketch-size constant c and report the shared-sketch ridge check for each.

    python scripts/calibrate_sketch_constant.py [--seeds 0 1 2] [--json out.json]

A value of c is acceptable when the check passes on every seed for both the
k=10/sd=3 and the k=40/sd=2 ensembles.  The default constant is the smallest
acceptable value with a margin of one doubling.
"""
import argparse
import json

from regwlra.harness.verify import verify_shared_sketch

ENSEMBLES = ({"k": 10, "sd": 3.0}, {"k": 40, "sd": 2.0})


def sweep(constants, seeds, epsilon=0.5):
    rows = []
    for c in constants:
        for ens in ENSEMBLES:
            for seed in seeds:
                res = verify_shared_sketch(n=200, d=30, epsilon=epsilon, trials=50, seed=seed, c=c, **ens)
                rows.append({"c": c, **ens, "seed": seed, "ell": res["ell"],
                             "median_ratio": res["median_ratio"], "pass_fraction": res["pass_fraction"],
                             "passed": res["passed"]})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--constants", type=float, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--json")
    args = ap.parse_args()
    rows = sweep(args.constants, args.seeds)
    print(f"{'c':>4} {'k':>3} {'sd':>4} {'seed':>4} {'ell':>4} {'median':>8} {'frac':>5}  pass")
    for r in rows:
        print(f"{r['c']:>4g} {r['k']:>3} {r['sd']:>4g} {r['seed']:>4} {r['ell']:>4} "
              f"{r['median_ratio']:>8.4f} {r['pass_fraction']:>5.2f}  {r['passed']}")
    ok = [c for c in args.constants if all(r["passed"] for r in rows if r["c"] == c)]
    print("acceptable c:", ok)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
