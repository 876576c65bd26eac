"""How far the Gaussian (CLT) outage law sits from simulation for large surfaces.

    python scripts/clt_accuracy.py --out results/ [--quick]

For each (N, noise) the script finds the rho at which the simulated outage
equals each target probability, then evaluates the CLT law there.
"""

import argparse
import csv
from dataclasses import dataclass, field
import math
from pathlib import Path

import numpy as np

from risfoxh.fading import FadingModel, RisLinkSpec
from risfoxh.phase_noise import clt_moments, clt_outage, parse_noise
from risfoxh.simulate import snr_statistic


@dataclass
class CltConfig:
    sizes: tuple = (16, 32, 64)
    noises: tuple = ("gaussian:sigma=0.2", "quantized:L=2", "quantized:L=1")
    targets: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    samples: int = 2_000_000
    seed: int = 0
    out_name: str = "clt_accuracy.csv"


@dataclass
class Row:
    n: int
    noise: str
    target: float
    rho_db: float
    clt: float
    rel_err: float = field(init=False)

    def __post_init__(self):
        self.rel_err = self.clt / self.target - 1


def run(cfg):
    ray = FadingModel.rayleigh()
    rows = []
    for gi, (n, text) in enumerate((n, t) for n in cfg.sizes for t in cfg.noises):
        noise = parse_noise(text)
        link = RisLinkSpec.iid(n, ray, ray, 1.0, 1.0)
        stat = np.sort(snr_statistic(link, noise, cfg.samples, seed=cfg.seed, grid_index=gi))
        m = clt_moments(noise, ray, ray, n)
        for p in cfg.targets:
            k = int(round(p * len(stat)))
            if k < 20:
                continue  # too few samples below this quantile
            rho = 1.0 / (0.5 * (stat[k - 1] + stat[k]))
            row = Row(n, text, p, 10 * math.log10(rho), clt_outage(m, rho, 1.0).probability)
            rows.append(row)
            print(f"N={n:3d} {text:20s} MC {p:.0e} at {row.rho_db:7.2f} dB  CLT {row.clt:.3e} ({row.rel_err:+.0%})")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    cfg = CltConfig()
    if args.quick:
        cfg.sizes, cfg.samples, cfg.targets = (16, 64), 200_000, (1e-1, 1e-2, 1e-3)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run(cfg)
    with open(out / cfg.out_name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "noise", "mc_outage", "rho_db", "clt_outage", "relative_error"])
        for r in rows:
            w.writerow([r.n, r.noise, repr(r.target), repr(r.rho_db), repr(r.clt), repr(r.rel_err)])


if __name__ == "__main__":
    main()
