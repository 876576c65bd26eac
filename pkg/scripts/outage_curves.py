"""Exact, asymptotic and simulated outage curves for several fading pairs.

    python scripts/outage_curves.py --out results/ [--quick]

One CSV per case with columns rho_db, exact, asymptotic, mc, mc_low, mc_high.
"""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from risfoxh.asymptotic import asymptotic_outage, diversity_report
from risfoxh.errors import RisFoxHError
from risfoxh.fading import RisLinkSpec, parse_model
from risfoxh.outage import exact_outage
from risfoxh.simulate import simulate_outage


@dataclass
class CurveConfig:
    name: str
    n: int
    h: str
    g: str
    rho_db: tuple = tuple(np.arange(0.0, 31.0, 2.5))
    gamma_th: float = 1.0
    mc_samples: int = 2_000_000
    seed: int = 0

    def link(self):
        return RisLinkSpec.iid(self.n, parse_model(self.h), parse_model(self.g), 1.0, self.gamma_th)


@dataclass
class Experiment:
    cases: list = field(default_factory=lambda: [
        CurveConfig("rayleigh_n1", 1, "rayleigh", "rayleigh"),
        CurveConfig("rayleigh_n2", 2, "rayleigh", "rayleigh"),
        CurveConfig("nakagami_n2", 2, "nakagami:m=1.5", "nakagami:m=2.5", rho_db=tuple(np.arange(0.0, 21.0, 2.0))),
        CurveConfig("alphamu_n2", 2, "alphamu:alpha=2,mu=1.5", "alphamu:alpha=1.5,mu=2",
                    rho_db=tuple(np.arange(0.0, 21.0, 2.0))),
        CurveConfig("rice_n1", 1, "rice:K=3", "rice:K=3", rho_db=tuple(np.arange(0.0, 26.0, 2.5))),
    ])


def _try(fn):
    try:
        return fn()
    except RisFoxHError:
        return None


def run_case(cfg, out_dir):
    base = cfg.link()
    rows = []
    for gi, rdb in enumerate(cfg.rho_db):
        link = base.with_snr(rho=10 ** (rdb / 10))
        ex = exact_outage(link).probability
        asy = _try(lambda: asymptotic_outage(link).probability)
        mc = simulate_outage(link, n_samples=cfg.mc_samples, seed=cfg.seed, grid_index=gi, min_hits=0)
        rows.append((rdb, ex, asy, mc.p_hat, mc.ci_low, mc.ci_high))
        print(f"{cfg.name:14s} {rdb:5.1f} dB  exact {ex:.4e}  asym {asy if asy is None else f'{asy:.4e}'}"
              f"  mc {mc.p_hat:.4e}")
    path = out_dir / f"{cfg.name}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho_db", "exact", "asymptotic", "mc", "mc_low", "mc_high"])
        w.writerows(["" if v is None else repr(float(v)) for v in r] for r in rows)
    rep = _try(lambda: diversity_report(base.with_snr(rho=10 ** (cfg.rho_db[-1] / 10))))
    if rep is not None:
        print(f"{cfg.name}: G_d = {rep.G_d:g} ({rep.scenario})")
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true", help="fewer samples, for a smoke run")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    exp = Experiment()
    for cfg in exp.cases:
        if args.quick:
            cfg.mc_samples = 100_000
            cfg.rho_db = cfg.rho_db[::3]
        run_case(cfg, out)


if __name__ == "__main__":
    main()
