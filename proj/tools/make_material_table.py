#!/usr/bin/env python3
"""Regenerate data/materials.csv from closed-form dispersion fits.

InP follows a two-pole Sellmeier fit. The ternary fits are adjusted so that
the undoped InGaAs guide and the AlInAs/InGaAs active region reproduce the
supermode resonance positions used by the default device configs. Al2O3 is a
sapphire Sellmeier curve scaled to 1.62 at 4.5 um (evaporated film).
"""
import argparse
import math

VERSION = "3"

INGAAS_OFFSET = 0.15
INGAAS_SLOPE = 1.5e-5      # extra dn/dnu per cm^-1, about 2222 cm^-1
ALINAS_OFFSET = 0.06
ALINAS_SLOPE = -4.0e-5   # effective; stands in for gain-region dispersion


def sellmeier(lam, a, terms):
    l2 = lam * lam
    return math.sqrt(a + sum(b * l2 / (l2 - c * c) for b, c in terms))


def n_inp(nu):
    lam = 1e4 / nu
    return sellmeier(lam, 7.255, [(2.316, 0.6263), (2.765, 32.935)])


def n_ingaas(nu):
    lam = 1e4 / nu
    base = math.sqrt(10.0 + 1.6 * lam**2 / (lam**2 - 1.3**2) - 0.0025 * lam**2)
    return base + INGAAS_OFFSET + INGAAS_SLOPE * (nu - 2222.0)


def n_alinas(nu):
    lam = 1e4 / nu
    base = math.sqrt(8.5 + 1.7 * lam**2 / (lam**2 - 0.95**2) - 0.0025 * lam**2)
    return base + ALINAS_OFFSET + ALINAS_SLOPE * (nu - 2222.0)


def n_sapphire(lam):
    return sellmeier(lam, 1.0, [(1.4313493, 0.0726631), (0.65054713, 0.1193242),
                                (5.3414021, 18.028251)])


def n_al2o3(nu):
    return n_sapphire(1e4 / nu) * 1.62 / n_sapphire(4.5)


MATERIALS = [
    ("InP", n_inp),
    ("InGaAs", n_ingaas),
    ("AlInAs", n_alinas),
    ("Al2O3", n_al2o3),
    ("Air", lambda nu: 1.0),
    ("Gold", lambda nu: 1.0),  # background only; free electrons via Drude
]


def main():
    global INGAAS_OFFSET, INGAAS_SLOPE, ALINAS_OFFSET, ALINAS_SLOPE
    ap = argparse.ArgumentParser()
    ap.add_argument("-o", "--output", default="data/materials.csv")
    ap.add_argument("--start", type=float, default=1800.0)
    ap.add_argument("--stop", type=float, default=2800.0)
    ap.add_argument("--step", type=float, default=5.0)
    ap.add_argument("--ingaas-offset", type=float, default=INGAAS_OFFSET)
    ap.add_argument("--ingaas-slope", type=float, default=INGAAS_SLOPE)
    ap.add_argument("--alinas-offset", type=float, default=ALINAS_OFFSET)
    ap.add_argument("--alinas-slope", type=float, default=ALINAS_SLOPE)
    args = ap.parse_args()
    INGAAS_OFFSET, INGAAS_SLOPE = args.ingaas_offset, args.ingaas_slope
    ALINAS_OFFSET, ALINAS_SLOPE = args.alinas_offset, args.alinas_slope

    count = int(round((args.stop - args.start) / args.step)) + 1
    with open(args.output, "w") as f:
        f.write(f"# qclring material table, version: {VERSION}\n")
        f.write("# background refractive index (real), no free carriers\n")
        f.write("# generated by tools/make_material_table.py\n")
        f.write("material,wavenumber_cm-1,n\n")
        for name, fn in MATERIALS:
            for i in range(count):
                nu = args.start + i * args.step
                f.write(f"{name},{nu:.1f},{fn(nu):.8f}\n")


if __name__ == "__main__":
    main()
