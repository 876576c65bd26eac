"""Config-driven experiment runner.

    risfoxh outage --config fig1.ini --out fig1.csv
    risfoxh diversity --config fig3.ini
    risfoxh bounds-check --config bounds.ini
    risfoxh sweep-L --config fig4.ini
    risfoxh selftest --seed 7 --out self.csv

dB values are converted to linear scale here and nowhere else.
Exit codes: 0 success, 2 configuration error, 3 accuracy failure.
"""

import argparse
import configparser
from dataclasses import dataclass, field, replace
import math
import re
import sys
import time

import numpy as np

from . import asymptotic, outage, phase_noise, simulate
from .errors import (AccuracyError, ConfigurationError, DegenerateParameterError, InsufficientPrecisionError,
                     RareEventError, RisFoxHError, UnsupportedDimensionError, UnsupportedScenarioError)
from .fading import RisLinkSpec, parse_model

METHODS = ("exact", "rice-series", "clt", "asymptotic", "mc")
CSV_HEADER = ("rho_db", "method", "outage", "error_low", "error_high", "runtime_ms")
EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY = 0, 2, 3

_KNOWN = {
    "link": {"n", "h", "g", "elements"},
    "noise": {"model"},
    "grid": {"rho_db", "gamma_th_db"},
    "run": {"methods", "mc_samples", "seed", "out", "min_hits"},
    "sweep": {"bits"},
    "bounds": {"draws"},
    "fit": {"window_db", "log_correction"},
}


class ConfigError(ConfigurationError):
    """Configuration problem tied to a file position."""

    def __init__(self, where, msg):
        super().__init__(f"{where}: {msg}")


@dataclass
class ExperimentConfig:
    elements: tuple
    noise: object = None
    rho_db: tuple = (0.0,)
    gamma_th_db: float = 0.0
    methods: tuple = ("exact",)
    mc_samples: int = 10 ** 6
    seed: int = 0
    out: str = None
    min_hits: int = simulate.MIN_HITS
    bits: tuple = (1, 2, 3, 4, 5)
    draws: int = 10 ** 5
    window_db: tuple = None
    log_correction: bool = False
    source: str = "<config>"
    lines: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.elements)

    def link(self, rho_db):
        return RisLinkSpec(self.elements, 10 ** (rho_db / 10), 10 ** (self.gamma_th_db / 10))


def _line_index(text):
    """(section, key) -> line number, for error messages."""
    idx, sec = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            sec = m.group(1).strip().lower()
            idx[(sec, None)] = no
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and sec:
            idx[(sec, m.group(1).strip().lower())] = no
    return idx


def _grid(text):
    """``0, 10, 20`` or ``start:stop:step`` (inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("range grid must be start:stop:step with a positive step")
        a, b, s = parts
        n = int(math.floor((b - a) / s + 1e-9)) + 1
        if n < 1:
            raise ValueError("empty range")
        return tuple(a + k * s for k in range(n))
    vals = tuple(float(p) for p in text.replace(",", " ").split())
    if not vals:
        raise ValueError("empty grid")
    return vals


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, path)


def parse_config(text, source="<config>"):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        where = f"{source}:{lineno}" if lineno else source
        raise ConfigError(where, str(exc).splitlines()[0]) from None
    lines = _line_index(text)

    def where(sec, key=None):
        no = lines.get((sec, key)) or lines.get((sec, None))
        return f"{source}:{no}" if no else source

    for sec in cp.sections():
        if sec.lower() not in _KNOWN:
            raise ConfigError(where(sec.lower()), f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in _KNOWN[sec.lower()]:
                raise ConfigError(where(sec.lower(), key), f"unknown key {key!r} in [{sec}]")

    def get(sec, key, conv, default):
        if not cp.has_option(sec, key):
            return default
        raw = cp.get(sec, key)
        try:
            return conv(raw)
        except (ValueError, RisFoxHError) as exc:
            raise ConfigError(where(sec, key), f"[{sec}] {key} = {raw.strip()!r}: {exc}") from None

    if not cp.has_section("link"):
        raise ConfigError(source, "missing [link] section")
    if cp.has_option("link", "elements"):
        def elems(raw):
            out = []
            for item in raw.split(";"):
                h, sep, g = item.partition("/")
                if not sep:
                    raise ValueError(f"element {item.strip()!r} must read h_model/g_model")
                out.append((parse_model(h), parse_model(g)))
            return tuple(out)
        elements = get("link", "elements", elems, None)
        if cp.has_option("link", "n") and get("link", "n", int, None) != len(elements):
            raise ConfigError(where("link", "n"), "n disagrees with the number of listed elements")
    else:
        for key in ("n", "h"):
            if not cp.has_option("link", key):
                raise ConfigError(where("link"), f"[link] needs {key!r} (or an 'elements' list)")
        n = get("link", "n", int, None)
        if n < 1:
            raise ConfigError(where("link", "n"), "n must be >= 1")
        h = get("link", "h", parse_model, None)
        g = get("link", "g", parse_model, h)
        elements = ((h, g),) * n

    def noise(raw):
        m = phase_noise.parse_noise(raw)
        return None if m.kind == "none" else m

    def methods(raw):
        ms = tuple(m.strip().lower() for m in raw.split(",") if m.strip())
        bad = [m for m in ms if m not in METHODS]
        if bad or not ms:
            raise ValueError(f"methods must be a non-empty subset of {', '.join(METHODS)}; got {bad or 'nothing'}")
        return ms

    def window(raw):
        w = _grid(raw)
        if len(w) != 2 or w[0] >= w[1]:
            raise ValueError("window must be 'lo, hi' with lo < hi")
        return w

    def bool_(raw):
        v = raw.strip().lower()
        if v not in ("yes", "no", "true", "false", "1", "0", "on", "off"):
            raise ValueError("expected yes/no")
        return v in ("yes", "true", "1", "on")

    def positive_int(raw):
        f = float(raw)  # accepts 1e6
        if not f.is_integer():
            raise ValueError("must be an integer")
        v = int(f)
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    def seed(raw):
        v = int(raw)
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return v

    def bits(raw):
        v = tuple(int(b) for b in raw.replace(",", " ").split())
        if not v or min(v) < 1:
            raise ValueError("bits must be integers >= 1")
        return v

    rho = get("grid", "rho_db", _grid, (0.0,))
    if any(b < a for a, b in zip(rho, rho[1:])):
        raise ConfigError(where("grid", "rho_db"), "rho grid must be sorted ascending")
    return ExperimentConfig(
        elements=elements,
        noise=get("noise", "model", noise, None),
        rho_db=rho,
        gamma_th_db=get("grid", "gamma_th_db", float, 0.0),
        methods=get("run", "methods", methods, ("exact",)),
        mc_samples=get("run", "mc_samples", positive_int, 10 ** 6),
        seed=get("run", "seed", seed, 0),
        out=get("run", "out", str.strip, None),
        min_hits=get("run", "min_hits", int, simulate.MIN_HITS),
        bits=get("sweep", "bits", bits, (1, 2, 3, 4, 5)),
        draws=get("bounds", "draws", positive_int, 10 ** 5),
        window_db=get("fit", "window_db", window, None),
        log_correction=get("fit", "log_correction", bool_, False),
        source=source,
        lines=lines,
    )


# evaluation

@dataclass(frozen=True)
class Row:
    rho_db: float
    method: str
    outage: float
    error_low: float
    error_high: float
    runtime_ms: float = None

    def cells(self, timing):
        rt = f"{self.runtime_ms:.3f}" if timing and self.runtime_ms is not None else ""
        return [_fmt(self.rho_db), self.method, _fmt(self.outage), _fmt(self.error_low), _fmt(self.error_high), rt]


def _fmt(x):
    return repr(float(x))


def _analytic_row(rho_db, res, t0):
    lo = max(0.0, res.probability - res.error_estimate)
    hi = min(1.0, res.probability + res.error_estimate)
    return Row(rho_db, res.method, res.probability, lo, hi, 1e3 * (time.perf_counter() - t0))


def evaluate(cfg, method, rho_db, grid_index, threads):
    """One CSV row for a method at one SNR."""
    link = cfg.link(rho_db)
    t0 = time.perf_counter()
    noise = cfg.noise
    if method == "mc":
        est = simulate.simulate_outage(link, noise, cfg.mc_samples, cfg.seed, grid_index, threads, cfg.min_hits)
        return Row(rho_db, "monte-carlo", est.p_hat, est.ci_low, est.ci_high, 1e3 * (time.perf_counter() - t0))
    if method == "clt":
        _require_iid(cfg, "clt")
        h, g = cfg.elements[0]
        mom = phase_noise.clt_moments(noise or phase_noise.PhaseNoiseModel.none(), h, g, cfg.n)
        return _analytic_row(rho_db, phase_noise.clt_outage(mom, link.rho, link.gamma_th), t0)
    if method == "asymptotic":
        if noise is not None:
            _require_iid(cfg, "asymptotic with phase noise")
            h, g = cfg.elements[0]
            mom = phase_noise.clt_moments(noise, h, g, cfg.n)
            return _analytic_row(rho_db, phase_noise.clt_asymptotic(mom, link.rho, link.gamma_th), t0)
        return _analytic_row(rho_db, asymptotic.asymptotic_outage(link), t0)
    if method in ("exact", "rice-series"):
        if noise is not None and cfg.n > 1:
            raise ConfigurationError(f"method {method!r} assumes ideal phases; with phase noise use clt or mc")
        if method == "rice-series" and not link.has_rice:
            raise ConfigurationError("method 'rice-series' needs Rice hops; use 'exact'")
        return _analytic_row(rho_db, outage.exact_outage(link), t0)
    raise ConfigurationError(f"unknown method {method!r}")


def _require_iid(cfg, what):
    if len(set(cfg.elements)) != 1:
        raise ConfigurationError(f"{what} needs i.i.d. elements")


def write_csv(rows, path, timing=False, extra=None):
    """CSV text with the fixed header; ``extra`` prepends (name, values) columns."""
    head = list(CSV_HEADER)
    body = [r.cells(timing) for r in rows]
    if extra:
        name, vals = extra
        head = [name] + head
        body = [[str(v)] + b for v, b in zip(vals, body)]
    text = "\n".join(",".join(r) for r in [head] + body) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


# subcommands

def cmd_outage(cfg, args):
    rows = [evaluate(cfg, m, r, gi, args.threads) for gi, r in enumerate(cfg.rho_db) for m in cfg.methods]
    write_csv(rows, cfg.out, args.timing)
    _summary(cfg)
    return EXIT_OK


def _summary(cfg, stream=sys.stderr):
    # G_c may depend on rho; quote it at the top of the grid where the asymptote is meant to hold
    link = cfg.link(cfg.rho_db[-1])
    try:
        gd, scen = asymptotic.diversity_order(link), asymptotic.classify_scenario(link)
    except (UnsupportedScenarioError, DegenerateParameterError, ConfigurationError) as exc:
        print(f"diversity: {exc}", file=stream)
    else:
        try:
            rep = asymptotic.diversity_report(link)
            gc = "n/a" if math.isnan(rep.G_c) else f"{rep.G_c:.6g} at {cfg.rho_db[-1]:g} dB"
            extra = f", ln-rho power = {rep.log_correction_power}"
        except (UnsupportedScenarioError, DegenerateParameterError, ConfigurationError) as exc:
            gc, extra = f"n/a ({exc})", ""
        print(f"diversity: G_d = {gd:g}, scenario = {scen}, G_c = {gc}{extra}", file=stream)
    if cfg.noise is not None:
        verdict, why = phase_noise.full_diversity_sufficient(cfg.noise)
        print(f"phase noise {cfg.noise}: full-diversity condition {verdict} ({why})", file=stream)


def cmd_diversity(cfg, args):
    _summary(cfg, sys.stdout)
    if cfg.noise is not None and len(set(cfg.elements)) == 1:
        h, g = cfg.elements[0]
        print(f"CLT diversity: {phase_noise.clt_diversity(cfg.noise, h, g, cfg.n):.6g}")
    if "mc" in cfg.methods:
        curve = simulate.sweep_outage(cfg.link(cfg.rho_db[0]), cfg.rho_db, cfg.noise, cfg.mc_samples,
                                      cfg.seed, args.threads, cfg.min_hits)
        win = cfg.window_db or (cfg.rho_db[0], cfg.rho_db[-1])
        fit = simulate.fit_diversity_slope(curve, win, cfg.log_correction)
        print(f"Monte Carlo slope over {win[0]:g}..{win[1]:g} dB: {fit.diversity:.4f} +- {fit.stderr:.4f}"
              + (f" (ln ln rho coefficient {fit.log_coef:.4f} +- {fit.log_stderr:.4f})" if cfg.log_correction else ""))
        if cfg.out:
            write_csv([Row(r, "monte-carlo", e.p_hat, e.ci_low, e.ci_high) for r, e in curve], cfg.out)
    return EXIT_OK


def cmd_bounds(cfg, args):
    rho = 10 ** (cfg.rho_db[0] / 10)
    h, g, th = simulate.bounded_phase_draws(cfg.link(cfg.rho_db[0]), cfg.noise, cfg.draws, cfg.seed)
    b = phase_noise.snr_bounds(h, g, th, rho)
    scale = np.maximum(b.upper, 1e-300)
    order_ok = (b.lower <= b.exact * (1 + 1e-12)) & (b.exact <= b.upper * (1 + 1e-12))
    agree = np.abs(b.exact - b.exact_pairwise) / scale
    ok = bool(order_ok.all() and agree.max() <= 1e-10)
    print(f"{cfg.draws} draws: ordering violations {int((~order_ok).sum())}, "
          f"max |component - pairwise| / upper = {agree.max():.3g}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_ACCURACY


def cmd_sweep_l(cfg, args):
    rows, labels = [], []
    gi = 0
    for L in cfg.bits:
        c = replace(cfg, noise=phase_noise.PhaseNoiseModel.quantized(L))
        for r in cfg.rho_db:
            for m in cfg.methods:
                if m not in ("mc", "clt"):
                    raise ConfigurationError(f"sweep-L supports methods mc and clt, not {m!r}")
                rows.append(evaluate(c, m, r, gi, args.threads))
                labels.append(L)
            gi += 1
    write_csv(rows, cfg.out, args.timing, extra=("L", labels))
    return EXIT_OK


SELFTEST_CONFIG = """
[link]
elements = rayleigh/rayleigh; nakagami:m=2/nakagami:m=1.5
[grid]
rho_db = 4, 7, 10
gamma_th_db = 0
[run]
methods = exact, asymptotic, mc
mc_samples = 400000
"""


def cmd_selftest(cfg, args):
    """Compact cross-check (exact and CLT against Monte Carlo); --full runs the acceptance suite."""
    if args.full:
        try:
            import pytest
        except ImportError:
            raise ConfigurationError("--full needs pytest installed") from None
        from pathlib import Path

        # the suite ships with the source checkout, not with the installed package
        suite = Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
        if not suite.exists():
            suite = Path("tests") / "test_acceptance.py"
        if not suite.exists():
            raise ConfigurationError("--full needs a source checkout with tests/test_acceptance.py")
        return EXIT_OK if pytest.main(["-q", str(suite)]) == 0 else EXIT_ACCURACY
    base = parse_config(SELFTEST_CONFIG, "<selftest>")
    base = replace(base, seed=cfg.seed if cfg else base.seed)
    if args.seed is not None:
        base = replace(base, seed=args.seed)
    rows = [evaluate(base, m, r, gi, args.threads) for gi, r in enumerate(base.rho_db) for m in base.methods]
    clt = replace(base, elements=((parse_model("rayleigh"), parse_model("rayleigh")),) * 16,
                  noise=phase_noise.PhaseNoiseModel.quantized(2), rho_db=(-20.0,), methods=("clt", "mc"))
    rows += [evaluate(clt, m, -20.0, 100, args.threads) for m in clt.methods]
    write_csv(rows, args.out, args.timing)
    failed = 0
    by = {}
    for r in rows:
        by.setdefault(r.rho_db, {})[r.method] = r
    for rdb, d in by.items():
        mc = d.get("monte-carlo")
        for tag in ("exact-multivar-H", "clt"):
            if tag in d and mc is not None:
                n = base.mc_samples
                lo, hi = simulate.wilson(round(mc.outage * n), n, 3.0)
                slack = 0.15 * d[tag].outage if tag == "clt" else 0.0
                ok = lo - slack <= d[tag].outage <= hi + slack
                failed += not ok
                print(f"{'PASS' if ok else 'FAIL'} {tag} vs monte-carlo at {rdb:g} dB: "
                      f"{d[tag].outage:.6g} in [{lo:.6g}, {hi:.6g}]" + (" +-15%" if slack else ""),
                      file=sys.stderr)
    return EXIT_OK if not failed else EXIT_ACCURACY


COMMANDS = {
    "outage": cmd_outage,
    "diversity": cmd_diversity,
    "bounds-check": cmd_bounds,
    "sweep-L": cmd_sweep_l,
    "selftest": cmd_selftest,
}


def build_parser():
    p = argparse.ArgumentParser(prog="risfoxh", description="Outage analysis of RIS links via Fox H-functions.")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--config", help="INI experiment file")
    p.add_argument("--seed", type=int, help="override [run] seed (unsigned 64-bit)")
    p.add_argument("--out", help="CSV output path ('-' for stdout)")
    p.add_argument("--threads", type=int, default=1, help="Monte Carlo worker threads")
    p.add_argument("--method", help="comma list overriding [run] methods")
    p.add_argument("--timing", action="store_true", help="fill runtime_ms (output no longer bit-stable)")
    p.add_argument("--full", action="store_true", help="selftest: run the whole acceptance suite")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigurationError("--threads must be >= 1")
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigurationError("--seed must be an unsigned 64-bit integer")
        cfg = None
        if args.config:
            cfg = load_config(args.config)
        elif args.command != "selftest":
            raise ConfigurationError(f"{args.command} needs --config")
        if cfg is not None:
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            if args.out:
                cfg = replace(cfg, out=args.out)
            if args.method:
                ms = tuple(m.strip().lower() for m in args.method.split(",") if m.strip())
                bad = [m for m in ms if m not in METHODS]
                if bad or not ms:
                    raise ConfigurationError(f"--method: unknown {bad or 'empty list'}; choose from {', '.join(METHODS)}")
                cfg = replace(cfg, methods=ms)
        return COMMANDS[args.command](cfg, args)
    except (ConfigurationError, UnsupportedDimensionError, UnsupportedScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, InsufficientPrecisionError, RareEventError, DegenerateParameterError) as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


if __name__ == "__main__":
    sys.exit(main())
