"""Exact outage probability of an RIS link with optimal phases.

With optimal phase shifts the SNR is rho (sum_i |h_i||g_i|)^2, so

    P_out = P(sum_i X_i < y),  X_i = |h_i||g_i|,  y = sqrt(gamma_th / rho).

Writing exp(-t X) as a Mellin-Barnes integral and inverting the Laplace
transform of the sum gives an N-variable Fox H-function.  In u = -s::

    P_out = (2 pi i)^{-N} int prod_i Gamma(-u_i) E[X_i^{u_i}] y^{-sum u} / Gamma(1 - sum u) du

with E[X^u] = kappa_h kappa_g / (c_h c_g) (c_h c_g)^{-u} Theta_h(u+1) Theta_g(u+1).
The shift u -> u + 1 turns the catalog rows (a, A), (b, B) into (a + A, A),
(b + B, B).  Rice hops are Poisson mixtures and enter as ``HyperBlock`` factors.
"""

from dataclasses import dataclass
import math

from . import foxh_multi
from .errors import AccuracyError, ConfigurationError, UnsupportedDimensionError
from .fading import RICE_TAIL_TOL, FadingModel, RisLinkSpec, components, to_foxh
from .foxh_multi import GammaBlock, HyperBlock, MultiFoxHParams

METHODS = ("exact-multivar-H", "rice-series", "monte-carlo", "clt", "asymptotic")


@dataclass(frozen=True)
class OutageResult:
    probability: float
    method: str
    error_estimate: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not (0.0 <= self.probability <= 1.0) or not math.isfinite(self.error_estimate) \
                or self.error_estimate < 0:
            raise ValueError(f"invalid outage result {self.probability!r} +- {self.error_estimate!r}")


def _shifted_rows(p):
    """Rows of Theta(u + 1) in block orientation: (numerator uppers, other uppers, m lowers, other lowers)."""
    up = [(a + A, A) for a, A in p.upper]
    lo = [(b + B, B) for b, B in p.lower]
    return up[: p.n], up[p.n:], lo[: p.m], lo[p.m:]


def element_block(h_params, g_params):
    """Per-element block Gamma(s) Theta_h(1 - s) Theta_g(1 - s) for two Fox-H hops."""
    hn, hu, hm, hl = _shifted_rows(h_params)
    gn, gu, gm, gl = _shifted_rows(g_params)
    upper = [(1.0, 1.0)] + hn + gn + hu + gu
    lower = hm + gm + hl + gl
    return GammaBlock(len(hm) + len(gm), 1 + len(hn) + len(gn), upper, lower)


def _hop_block(p):
    n, u, m, lo = _shifted_rows(p)
    return GammaBlock(len(m), len(n), n + u, m + lo)


_GAMMA_S = GammaBlock(0, 1, [(1.0, 1.0)], [])


def build_prop1_params(link, max_exact_vars=foxh_multi.MAX_EXACT_VARS):
    """Multivariate H parameters of the exact outage for a non-Rice link."""
    if link.has_rice:
        raise ConfigurationError("Rice hops use the series form: call exact_outage or exact_outage_rice")
    _check_dim(link, max_exact_vars)
    blocks, args, tau = [], [], 1.0
    y = math.sqrt(link.rho_t)
    for h, g in link.elements:
        ph, pg = _fox(h), _fox(g)
        blocks.append(element_block(ph, pg))
        args.append(ph.scale * pg.scale * y)
        tau *= ph.kappa * pg.kappa / (ph.scale * pg.scale)
    N = link.n_elements
    return MultiFoxHParams(0, (), ((0.0, (1.0,) * N),), tuple(blocks), tuple(args), tau)


def _fox(model):
    if model.kind == "constant":
        raise ConfigurationError("the constant model has no density; it is for Monte Carlo checks only")
    return to_foxh(model)


def _check_dim(link, max_exact_vars):
    if link.n_elements > max_exact_vars:
        raise UnsupportedDimensionError(
            f"N = {link.n_elements} exceeds max_exact_vars = {max_exact_vars}; "
            "use simulate.simulate_outage or asymptotic.asymptotic_outage")


def build_mixture_params(link, series_tol=RICE_TAIL_TOL, max_exact_vars=foxh_multi.MAX_EXACT_VARS):
    """Parameters for links with Rice hops: per-hop Poisson mixtures inside ``HyperBlock``.

    Each hop contributes sum_k w_k kappa_k / c Theta_k(1 - s); the Poisson index
    of every hop is truncated where its tail mass drops below
    series_tol / (2N), so the total neglected probability is below series_tol
    (all terms are non-negative).  Returns (params, neglected_mass_bound).
    """
    _check_dim(link, max_exact_vars)
    N = link.n_elements
    blocks, args = [], []
    tail = 0.0
    y = math.sqrt(link.rho_t)
    for h, g in link.elements:
        factors = [((1.0, _GAMMA_S),)]
        scale = 1.0
        for model in (h, g):
            comps, t = components(model, series_tol / (2 * N))
            tail += t
            c = comps[0][1].scale
            factors.append(tuple((w * p.kappa / p.scale, _hop_block(p)) for w, p in comps))
            scale *= c
        blocks.append(HyperBlock(tuple(factors)))
        args.append(scale * y)
    return MultiFoxHParams(0, (), ((0.0, (1.0,) * N),), tuple(blocks), tuple(args), 1.0), tail


def _finish(value, err, method):
    # clamp only within the error estimate
    if value < -err - 1e-12 or value > 1 + err + 1e-12:
        raise AccuracyError(f"outage {value:.6g} outside [0, 1] beyond its error {err:.3g}")
    return OutageResult(min(max(value, 0.0), 1.0), method, err)


def exact_outage(link, tol=1e-10, max_exact_vars=foxh_multi.MAX_EXACT_VARS, series_tol=RICE_TAIL_TOL):
    """Exact outage probability by N-fold Mellin-Barnes quadrature.

    Links with Rice hops are routed through the Poisson-mixture form and
    tagged ``rice-series``; their error estimate includes the series tail.
    """
    if link.has_rice:
        params, tail = build_mixture_params(link, series_tol, max_exact_vars)
        res = foxh_multi.eval(params, tol=tol, max_exact_vars=max_exact_vars)
        return _finish(res.value, res.error + tail, "rice-series")
    params = build_prop1_params(link, max_exact_vars)
    res = foxh_multi.eval(params, tol=tol, max_exact_vars=max_exact_vars)
    return _finish(res.value, res.error, "exact-multivar-H")


def exact_outage_rice(Kh, Kg, N, rho, gamma_th, series_tol=1e-10, tol=1e-10,
                      max_exact_vars=foxh_multi.MAX_EXACT_VARS):
    """Exact outage for i.i.d. Rice hops (Rayleigh when K = 0)."""
    if Kh < 0 or Kg < 0:
        raise ConfigurationError("Rice factors must be non-negative")
    link = RisLinkSpec.iid(N, FadingModel.rice(Kh), FadingModel.rice(Kg), rho, gamma_th)
    return exact_outage(link, tol=tol, max_exact_vars=max_exact_vars, series_tol=series_tol)
