"""Writes the bundled sample absorption table.

The table is an illustrative humid-air profile for 100-450 GHz: a
frequency-squared continuum plus Lorentzian lines at the main oxygen and
water-vapour resonances. Line heights are tuned to typical sea-level
magnitudes (about 27 C, 1 atm, 50 % RH); it is not a spectroscopic model.
Replace it with a line-by-line table when absolute accuracy matters.
"""

import math
import sys

# (centre GHz, peak above continuum in dB/km, half width GHz)
LINES = [
    (118.75, 1.5, 2.0),
    (183.31, 45.0, 3.0),
    (321.23, 4.0, 3.0),
    (325.15, 50.0, 3.0),
    (380.20, 240.0, 3.2),
    (439.15, 120.0, 3.2),
    (443.02, 55.0, 3.2),
    (448.00, 210.0, 3.2),
]
CONTINUUM_DB_KM_AT_100GHZ = 1.2
DB_PER_NEPER = 10.0 / math.log(10.0)


def db_per_km(f_ghz: float) -> float:
    total = CONTINUUM_DB_KM_AT_100GHZ * (f_ghz / 100.0) ** 2
    for centre, peak, width in LINES:
        total += peak * width**2 / ((f_ghz - centre) ** 2 + width**2)
    return total


def main(path: str) -> None:
    with open(path, "w") as out:
        out.write("frequency_hz,k_per_m\n")
        for f_ghz in range(100, 451):
            k = db_per_km(f_ghz) / DB_PER_NEPER / 1000.0
            out.write(f"{f_ghz * 1e9:.6e},{k:.6e}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "absorption_100_450ghz.csv")
