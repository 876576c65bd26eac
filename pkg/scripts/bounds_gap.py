"""Outage of the SNR lower and upper bounds next to the true SNR under phase noise.

    python scripts/bounds_gap.py --out results/

Phase vectors are drawn with epsilon_min >= 0 enforced, so the sandwich
sum a_i^2 <= |sum a_i e^{j theta_i}|^2 <= (sum a_i)^2 holds draw by draw.
"""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from risfoxh.fading import RisLinkSpec, parse_model
from risfoxh.phase_noise import parse_noise, snr_bounds
from risfoxh.simulate import bounded_phase_draws


@dataclass
class BoundsConfig:
    elements: tuple = (("rayleigh", "nakagami:m=2"), ("rice:K=3", "rayleigh"),
                       ("alphamu:alpha=2,mu=1.5", "nakagami:m=0.8"), ("rayleigh", "rayleigh"))
    noise: str = "quantized:L=2"
    rho_db: tuple = tuple(np.arange(-20.0, 11.0, 2.5))
    draws: int = 1_000_000
    seed: int = 0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--draws", type=int)
    args = ap.parse_args()
    cfg = BoundsConfig()
    if args.draws:
        cfg.draws = args.draws
    link = RisLinkSpec(tuple((parse_model(h), parse_model(g)) for h, g in cfg.elements), 1.0, 1.0)
    h, g, th = bounded_phase_draws(link, parse_noise(cfg.noise), cfg.draws, cfg.seed)
    b = snr_bounds(h, g, th, 1.0)  # normalised SNR; scale by rho below
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bounds_gap.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho_db", "outage_upper_snr", "outage_exact", "outage_lower_snr"])
        for rdb in cfg.rho_db:
            thr = 1.0 / 10 ** (rdb / 10)
            row = [float(np.mean(v < thr)) for v in (b.upper, b.exact, b.lower)]
            w.writerow([repr(float(rdb))] + [repr(v) for v in row])
            print(f"{rdb:6.1f} dB  {row[0]:.3e} <= {row[1]:.3e} <= {row[2]:.3e}")


if __name__ == "__main__":
    main()
