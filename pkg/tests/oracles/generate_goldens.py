"""Regenerate tests/data/goldens.json from arbitrary-precision references.

Run from the repository root:  python tests/oracles/generate_goldens.py

Uses mpmath only; nothing from the package under test is imported.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

# CODATA 2018, exact in the 2019 SI
H = mp.mpf("6.62607015e-34")
C = mp.mpf("299792458")
K = mp.mpf("1.380649e-23")


def planck(lam_um, T):
    lam = mp.mpf(lam_um) * mp.mpf("1e-6")
    x = H * C / (lam * K * mp.mpf(T))
    return 2 * H * C**2 / lam**5 / mp.expm1(x) * mp.mpf("1e-12")


def rayleigh_jeans(lam_um, T):
    lam = mp.mpf(lam_um) * mp.mpf("1e-6")
    return 2 * C * K * mp.mpf(T) / lam**4 * mp.mpf("1e-12")


def main():
    # 50 log-spaced points on [1e-3, 1e6], rounded to doubles before evaluation
    xs = [float(mp.mpf(10) ** (mp.mpf(-3) + mp.mpf(9) * i / 49)) for i in range(50)]
    table = [
        {"x": x, "digamma": str(mp.digamma(mp.mpf(x))), "trigamma": str(mp.polygamma(1, mp.mpf(x)))}
        for x in xs
    ]
    out = {
        "special_functions": table,
        "euler_gamma": str(mp.euler),
        "planck_10um_4000K": str(planck(10, 4000)),
        "rj_10um_4000K": str(rayleigh_jeans(10, 4000)),
    }
    path = Path(__file__).resolve().parents[1] / "data" / "goldens.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
