"""High-precision reference values for the shallow-water channel model.

Evaluates Thorp absorption and the four-term ambient noise model with mpmath
at 50 significant digits, independently of the C++ implementation. Prints
JSON; with --check FILE, compares against a stored copy instead.
"""

import argparse
import json
import sys

from mpmath import log10, mp, mpf, sqrt

mp.dps = 50


def thorp_db_per_km(f):
    f = mpf(f)
    f2 = f * f
    return mpf("3.3e-3") + mpf("0.11") * f2 / (1 + f2) + 44 * f2 / (4100 + f2) + mpf("3.0e-4") * f2


def noise_terms(f, s, w):
    f, s, w = mpf(f), mpf(s), mpf(w)
    return {
        "turbulence": 17 - 30 * log10(f),
        "shipping": 40 + 20 * (s - mpf("0.5")) + 26 * log10(f) - 60 * log10(f + mpf("0.03")),
        "wind": 50 + mpf("7.5") * sqrt(w) + 20 * log10(f) - 40 * log10(f + mpf("0.4")),
        "thermal": -15 + 20 * log10(f),
    }


def total_noise_db(terms):
    return 10 * log10(sum(mpf(10) ** (v / 10) for v in terms.values()))


def path_loss_db(d_km, m, f):
    return 10 * mpf(m) * log10(mpf(d_km)) + mpf(d_km) * thorp_db_per_km(f)


def golden():
    out = {"thorp_db_per_km": {}, "noise_db": [], "path_loss_db": []}
    for f in ("1", "10", "25", "50", "100"):
        out["thorp_db_per_km"][f] = float(thorp_db_per_km(f))
    for f, s, w in (("25", "0.5", "0"), ("25", "0", "0"), ("25", "1", "10"), ("10", "0.5", "5")):
        terms = noise_terms(f, s, w)
        row = {"f": float(f), "s": float(s), "w": float(w)}
        row.update({k: float(v) for k, v in terms.items()})
        row["total"] = float(total_noise_db(terms))
        out["noise_db"].append(row)
    for d, m in (("0.5", "1.5"), ("1", "1.5"), ("2", "1.5"), ("3", "2")):
        out["path_loss_db"].append(
            {"d_km": float(d), "m": float(m), "f": 25.0, "db": float(path_loss_db(d, m, "25"))})
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--check", help="stored JSON to compare against")
    args = parser.parse_args()
    values = golden()
    if args.check:
        with open(args.check) as fh:
            stored = json.load(fh)
        if stored != values:
            print("stored golden values differ from a fresh evaluation", file=sys.stderr)
            return 1
        print("golden values reproduce")
        return 0
    print(json.dumps(values, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
