#!/usr/bin/env python3
"""Regenerate the bundled zeta-zero ordinate tables with mpmath.

    python3 scripts/gen_zeros.py

Writes data/zeros_2100.txt (ordinates only) and data/zeros_10_zprime.txt
(ordinate plus real and imaginary parts of zeta'(rho)).
"""
import os

import mpmath as mp

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

mp.mp.dps = 40


def main():
    os.makedirs(DATA, exist_ok=True)
    with open(os.path.join(DATA, "zeros_2100.txt"), "w") as out:
        out.write("# ordinates of the first 2100 nontrivial zeros of zeta(s), 30 significant digits\n")
        for n in range(1, 2101):
            out.write(mp.nstr(mp.zetazero(n).imag, 30, strip_zeros=False) + "\n")
    with open(os.path.join(DATA, "zeros_10_zprime.txt"), "w") as out:
        out.write("# gamma  re(zeta'(rho))  im(zeta'(rho)) for the first 10 zeros\n")
        for n in range(1, 11):
            g = mp.zetazero(n).imag
            d = mp.zeta(mp.mpc(mp.mpf(1) / 2, g), derivative=1)
            out.write("%s %s %s\n" % (mp.nstr(g, 30), mp.nstr(d.real, 25), mp.nstr(d.imag, 25)))


if __name__ == "__main__":
    main()
