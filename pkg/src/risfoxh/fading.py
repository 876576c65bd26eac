"""Fading catalog: Fox-H parameters, Rice series, moments and exact samplers.

Every model is normalised to unit power, E[X^2] = 1, so the average SNR
carries all deterministic scaling.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import ConfigurationError
from .foxh import FoxHParams, MixtureFoxH, mellin_moment
from .special import kummer_1f1

RICE_TAIL_TOL = 1e-10
RICE_MAX_TERMS = 120

_KINDS = {
    "rayleigh": (),
    "nakagami": ("m",),
    "alphamu": ("alpha", "mu"),
    "rice": ("K",),
    "fisherf": ("m", "ms"),
    "genk": ("m", "k"),
    "constant": (),  # amplitude identically 1; Monte Carlo degenerate checks only
}


@dataclass(frozen=True)
class FadingModel:
    kind: str
    params: tuple = ()

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in _KINDS:
            raise ConfigurationError(f"unknown fading model {self.kind!r}; known: {', '.join(_KINDS)}")
        vals = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", vals)
        if len(vals) != len(_KINDS[kind]):
            raise ConfigurationError(f"{kind} takes parameters {_KINDS[kind]}, got {len(vals)} values")
        if kind == "rice":
            if not vals[0] >= 0:
                raise ConfigurationError("rice: K must be >= 0")
        elif any(not v > 0 or not math.isfinite(v) for v in vals):
            raise ConfigurationError(f"{kind}: parameters must be positive and finite")
        if kind == "fisherf" and vals[1] <= 1:
            # unit power needs a finite second moment, which requires m_s > 1
            raise ConfigurationError("fisherf: ms must exceed 1 for a finite second moment")

    # constructors
    @classmethod
    def rayleigh(cls):
        return cls("rayleigh")

    @classmethod
    def nakagami(cls, m):
        return cls("nakagami", (m,))

    @classmethod
    def alpha_mu(cls, alpha, mu):
        return cls("alphamu", (alpha, mu))

    @classmethod
    def rice(cls, K):
        return cls("rice", (K,))

    @classmethod
    def fisher_f(cls, m, ms):
        return cls("fisherf", (m, ms))

    @classmethod
    def generalized_k(cls, m, k):
        return cls("genk", (m, k))

    @classmethod
    def constant(cls):
        return cls("constant")

    def __getattr__(self, name):
        names = _KINDS.get(object.__getattribute__(self, "kind"), ())
        if name in names:
            return self.params[names.index(name)]
        raise AttributeError(name)

    def __str__(self):
        names = _KINDS[self.kind]
        if not names:
            return self.kind
        return self.kind + ":" + ",".join(f"{n}={v:g}" for n, v in zip(names, self.params))


def parse_model(text):
    """Parse ``rayleigh``, ``nakagami:m=2``, ``alphamu:alpha=2,mu=1.5`` and so on."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind not in _KINDS:
        raise ConfigurationError(f"unknown fading model {kind!r}")
    given = {}
    for item in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigurationError(f"expected key=value in {text!r}, got {item!r}")
        try:
            given[key.strip()] = float(val)
        except ValueError:
            raise ConfigurationError(f"{key.strip()} = {val.strip()!r} is not a number") from None
    names = _KINDS[kind]
    unknown = set(given) - set(names)
    missing = [n for n in names if n not in given]
    if unknown or missing:
        raise ConfigurationError(f"{kind} expects parameters {names}; unknown {sorted(unknown)}, missing {missing}")
    return FadingModel(kind, tuple(given[n] for n in names))


@dataclass(frozen=True)
class RisLinkSpec:
    elements: tuple  # ((h_model, g_model), ...) one pair per element
    rho: float
    gamma_th: float

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(tuple(e) for e in self.elements))
        if not self.elements:
            raise ConfigurationError("link needs at least one element")
        if any(len(e) != 2 or not all(isinstance(x, FadingModel) for x in e) for e in self.elements):
            raise ConfigurationError("each element is a (h_model, g_model) pair of FadingModel")
        if not (self.rho > 0 and self.gamma_th > 0):
            raise ConfigurationError("rho and gamma_th must be positive (linear scale)")

    @classmethod
    def iid(cls, n, h_model, g_model, rho, gamma_th):
        return cls(((h_model, g_model),) * n, rho, gamma_th)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def rho_t(self):
        return self.gamma_th / self.rho

    def with_snr(self, rho=None, gamma_th=None):
        return RisLinkSpec(self.elements, self.rho if rho is None else rho,
                           self.gamma_th if gamma_th is None else gamma_th)

    @property
    def has_rice(self):
        return any(x.kind == "rice" for e in self.elements for x in e)


def to_foxh(model):
    """Fox-H parameters of the unit-power amplitude pdf."""
    k = model.kind
    if k == "rice":
        raise ConfigurationError("rice has no finite Fox-H form; use rice_series")
    if k == "constant":
        raise ConfigurationError("the constant model has no density")
    if k in ("rayleigh", "nakagami"):
        m = 1.0 if k == "rayleigh" else model.m
        c = math.sqrt(m)
        return FoxHParams(1, 0, (), ((m - 0.5, 0.5),), c, c / math.gamma(m))
    if k == "alphamu":
        a, mu = model.params
        eta = math.exp(gammaln(mu + 2 / a) - gammaln(mu))
        c = math.sqrt(eta)
        return FoxHParams(1, 0, (), ((mu - 1 / a, 1 / a),), c, c / math.gamma(mu))
    if k == "genk":
        m, kk = model.params
        c = math.sqrt(m * kk)
        return FoxHParams(2, 0, (), ((m - 0.5, 0.5), (kk - 0.5, 0.5)), c,
                          c * math.exp(-gammaln(m) - gammaln(kk)))
    if k == "fisherf":
        m, ms = model.params
        c = math.sqrt(m / (ms - 1))
        return FoxHParams(1, 1, ((0.5 - ms, 0.5),), ((m - 0.5, 0.5),), c,
                          c * math.exp(-gammaln(m) - gammaln(ms)))
    raise ConfigurationError(f"no Fox-H form for {k}")


def rice_series_term(K, k):
    """(kappa_k, c_k, params_k) of the k-th term of the Rice pdf series.

    The pdf is sum_k kappa_k H^{1,0}_{0,1}[c x | (k + 1/2, 1/2)], i.e. a
    Poisson(K) mixture of Nakagami(k+1) laws at power 1/(K+1) each.
    """
    if K < 0 or k < 0:
        raise ConfigurationError("rice_series_term needs K >= 0 and k >= 0")
    c = math.sqrt(K + 1.0)
    if K == 0:
        kappa = c if k == 0 else 0.0
    else:
        kappa = c * math.exp(-K + k * math.log(K) - 2 * gammaln(k + 1))
    return kappa, c, FoxHParams(1, 0, (), ((k + 0.5, 0.5),), c, kappa)


def rice_terms(K, tail_tol=RICE_TAIL_TOL, max_terms=RICE_MAX_TERMS):
    """Truncated Poisson mixture: (weights, tail mass).

    Keeps the smallest k_max with Poisson(K) tail below tail_tol, capped.
    Weights are Poisson probabilities; component k is Nakagami(k+1) scaled by 1/(K+1).
    """
    kmax = int(poisson.isf(tail_tol, K)) + 1 if K > 0 else 0
    kmax = min(kmax, max_terms - 1)
    ks = np.arange(kmax + 1)
    w = poisson.pmf(ks, K) if K > 0 else np.array([1.0])
    return w, float(poisson.sf(kmax, K)) if K > 0 else 0.0


def components(model, tail_tol=RICE_TAIL_TOL):
    """Mixture view of any model: [(weight, FoxHParams)], plus the dropped tail mass."""
    if model.kind != "rice":
        return [(1.0, to_foxh(model))], 0.0
    K = model.K
    w, tail = rice_terms(K, tail_tol)
    c = math.sqrt(K + 1.0)
    comps = [(float(wk), FoxHParams(1, 0, (), ((k + 0.5, 0.5),), c, c / math.gamma(k + 1)))
             for k, wk in enumerate(w) if wk > 0]
    return comps, tail


def pdf(model, x, tol=1e-12):
    """Amplitude pdf evaluated through the Fox-H representation."""
    from .foxh import eval as h_eval

    comps, _ = components(model)
    params = comps[0][1] if len(comps) == 1 else MixtureFoxH(tuple(comps))
    return h_eval(params, np.asarray(x, dtype=float), tol=tol)[0]


def mean_amplitude(model):
    """E[X]; the Mellin moment at s = 2 for Fox-H models, 1F1 form for Rice."""
    if model.kind == "constant":
        return 1.0
    if model.kind == "rice":
        K = model.K
        return math.sqrt(math.pi) / 2 * kummer_1f1(-0.5, 1.0, -K) / math.sqrt(K + 1)
    return mellin_moment(to_foxh(model), 2.0)


def sample(model, rng, size):
    """Exact draws of the unit-power amplitude from a numpy Generator."""
    k = model.kind
    if k == "constant":
        return np.ones(size)
    if k == "rayleigh":
        return np.sqrt(rng.standard_exponential(size))
    if k == "nakagami":
        m = model.m
        return np.sqrt(rng.standard_gamma(m, size) / m)
    if k == "alphamu":
        a, mu = model.params
        eta = math.exp(gammaln(mu + 2 / a) - gammaln(mu))
        return rng.standard_gamma(mu, size) ** (1 / a) / math.sqrt(eta)
    if k == "genk":
        m, kk = model.params
        return np.sqrt(rng.standard_gamma(m, size) * rng.standard_gamma(kk, size) / (m * kk))
    if k == "fisherf":
        m, ms = model.params
        return np.sqrt((ms - 1) / m * rng.standard_gamma(m, size) / rng.standard_gamma(ms, size))
    if k == "rice":
        K = model.K
        s = math.sqrt(0.5 / (K + 1))
        re = math.sqrt(K / (K + 1)) + s * rng.standard_normal(size)
        im = s * rng.standard_normal(size)
        return np.hypot(re, im)
    raise ConfigurationError(f"no sampler for {k}")
