"""Phase noise: CLT outage for large N, its high-SNR form, and exact SNR bounds.

With residual phase errors theta_i the received amplitude is
|sum_i a_i e^{j theta_i}|, a_i = |h_i||g_i|.  For large N the normalised sum
H_b = (1/N) sum_i a_i e^{j theta_i} has independent Gaussian components
X ~ N(nu, sigma_X^2), Y ~ N(0, sigma_Y^2), with

    nu = K_1 L_1 L_2,  sigma_X^2 = (1 + K_2 - 2 nu^2) / (2N),  sigma_Y^2 = (1 - K_2) / (2N)

where K_t = E[exp(j t theta)] and L_1, L_2 are the hop amplitude means.  The
outage is P(|H_b|^2 < gamma_th / (N^2 rho)).
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, ndtr
from scipy.stats import poisson

from . import foxh_multi
from .errors import AccuracyError, ConfigurationError, DegenerateParameterError
from .fading import mean_amplitude
from .foxh_multi import GammaBlock, HyperBlock, MultiFoxHParams
from .outage import OutageResult

GAUSS_SIGMA_WARN = 0.5
GAUSS_SIGMA_MAX = 1.0
_KINDS = ("none", "gaussian", "genuniform", "uniform", "quantized")


@dataclass(frozen=True)
class PhaseNoiseModel:
    kind: str = "none"
    param: float = None  # sigma (gaussian), q (genuniform) or L (quantized)

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in _KINDS:
            raise ConfigurationError(f"unknown phase-noise model {self.kind!r}; known: {', '.join(_KINDS)}")
        p = self.param
        if kind in ("none", "uniform"):
            if p is not None:
                raise ConfigurationError(f"{kind} phase noise takes no parameter")
        elif kind == "gaussian":
            if p is None or not 0 < p <= GAUSS_SIGMA_MAX:
                raise ConfigurationError(f"gaussian sigma must lie in (0, {GAUSS_SIGMA_MAX}] rad, got {p}")
            if p > GAUSS_SIGMA_WARN:
                warnings.warn(f"gaussian sigma = {p} rad: the small-variance characteristic function is rough here",
                              stacklevel=3)
        elif kind == "genuniform":
            if p is None or not 0 < p < 1:
                raise ConfigurationError(f"generalised uniform q must lie in (0, 1), got {p}")
        elif kind == "quantized":
            if p is None or p < 1 or float(p) != int(p):
                raise ConfigurationError(f"quantization bits L must be an integer >= 1, got {p}")
            object.__setattr__(self, "param", int(p))

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", sigma)

    @classmethod
    def generalized_uniform(cls, q):
        return cls("genuniform", q)

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def quantized(cls, L):
        return cls("quantized", L)

    @property
    def q(self):
        """Half-width of the uniform support in units of pi (1 for uniform, 0 for none)."""
        if self.kind == "quantized":
            return 2.0 ** (-self.param)
        if self.kind == "genuniform":
            return self.param
        if self.kind == "uniform":
            return 1.0
        if self.kind == "none":
            return 0.0
        return None

    def __str__(self):
        return self.kind if self.param is None else f"{self.kind}:{self.param:g}"


def parse_noise(text):
    """``none``, ``uniform``, ``gaussian:sigma=0.2``, ``genuniform:q=0.25``, ``quantized:L=2``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    names = {"gaussian": "sigma", "genuniform": "q", "quantized": "L"}
    if kind not in _KINDS:
        raise ConfigurationError(f"unknown phase-noise model {kind!r}")
    if kind not in names:
        if rest.strip():
            raise ConfigurationError(f"{kind} takes no parameters")
        return PhaseNoiseModel(kind)
    key, eq, val = rest.partition("=")
    if not eq or key.strip() != names[kind]:
        raise ConfigurationError(f"{kind} expects {names[kind]}=<value>, got {rest!r}")
    try:
        return PhaseNoiseModel(kind, float(val))
    except ValueError:
        raise ConfigurationError(f"{names[kind]} = {val.strip()!r} is not a number") from None


def char_fn(model, t):
    """K_t = E[exp(j t theta)] (real, the models are symmetric)."""
    t = np.asarray(t, dtype=float)
    if model.kind == "none":
        out = np.ones_like(t)
    elif model.kind == "gaussian":
        out = np.exp(-0.5 * model.param ** 2 * t ** 2)
    else:
        out = np.sinc(model.q * t)  # numpy sinc is sin(pi x) / (pi x)
    return float(out) if out.ndim == 0 else out


def sample_phase(model, rng, size):
    if model.kind == "none":
        return np.zeros(size)
    if model.kind == "gaussian":
        return model.param * rng.standard_normal(size)
    q = model.q
    return rng.uniform(-q * math.pi, q * math.pi, size)


@dataclass(frozen=True)
class CltMoments:
    nu: float
    sigmaX2: float
    sigmaY2: float
    n_elements: int
    uniform: bool  # nu == 0: zero-mean circular case

    @property
    def zx(self):
        return self.nu ** 2 / (2 * self.sigmaX2)

    @property
    def zy(self):
        return math.inf if self.sigmaY2 == 0 else self.nu ** 2 / (2 * self.sigmaY2)


def clt_moments(model, h_model, g_model, N):
    if N < 1:
        raise ConfigurationError("N must be >= 1")
    K1, K2 = char_fn(model, 1.0), char_fn(model, 2.0)
    lam = mean_amplitude(h_model) * mean_amplitude(g_model)
    nu = K1 * lam
    sx = (1 + K2 - 2 * nu ** 2) / (2 * N)
    sy = max((1 - K2) / (2 * N), 0.0)
    if not sx > 0:
        raise DegenerateParameterError(f"sigma_X^2 = {sx:g} is not positive")
    return CltMoments(float(nu), float(sx), float(sy), int(N), model.kind == "uniform" or abs(nu) < 1e-15)


def _threshold(m, rho, gamma_th):
    if not (rho > 0 and gamma_th > 0):
        raise ConfigurationError("rho and gamma_th must be positive")
    if m.n_elements < 16:
        warnings.warn(f"N = {m.n_elements}: the CLT approximation is rough for small N", stacklevel=3)
    return gamma_th / (m.n_elements ** 2 * rho)


def case2_params(N, t):
    """Zero-mean (uniform noise) form: per variable Gamma(s) Gamma(1/2 - s) Gamma(N - s) / Gamma(N - 2s).

    The factor Gamma(N - s)/Gamma(N - 2s) stands in for N^s (large-N gamma
    ratio), both arguments are gamma_th / (N^2 rho), prefactor 1/pi.  The
    kernel then decays only like 1/|Im s| beyond |Im s| ~ N.
    """
    blk = GammaBlock(2, 1, [(1.0, 1.0), (N, 2.0)], [(0.5, 1.0), (N, 1.0)])
    return MultiFoxHParams(0, (), ((0.0, (1.0, 1.0)),), (blk, blk), (t, t), 1.0 / math.pi)


def case1_params(m, t, tail_tol=1e-13):
    """Non-zero mean: |H_b|^2 = X^2 + Y^2 with X^2 noncentral chi-square.

    X^2 / (2 sigma_X^2) is a Poisson(Z_X) mixture of Gamma(1/2 + J) laws,
    Y^2 / (2 sigma_Y^2) is Gamma(1/2).  Both enter the sum-CDF integral
    Gamma(s) E[G^{-s}] t^s / Gamma(1 + sum s).  Without a Y component (no
    noise) the integral is one-dimensional.  Returns (params, tail_mass).
    """
    zx = m.zx
    lo = int(poisson.ppf(tail_tol / 2, zx)) if zx > 0 else 0
    hi = int(poisson.isf(tail_tol / 2, zx)) + 1 if zx > 0 else 0
    J = np.arange(lo, hi + 1)
    w = poisson.pmf(J, zx) if zx > 0 else np.array([1.0])
    tail = max(0.0, 1.0 - float(w.sum()))
    keep = w > 0
    comps = tuple((float(wj) * math.exp(-gammaln(0.5 + j)), GammaBlock(1, 0, [], [(0.5 + j, 1.0)]))
                  for wj, j in zip(w[keep], J[keep]))
    gs = ((1.0, GammaBlock(0, 1, [(1.0, 1.0)], [])),)
    var_x = HyperBlock((gs, comps))
    if m.sigmaY2 == 0:
        return MultiFoxHParams(0, (), ((0.0, (1.0,)),), (var_x,), (t / (2 * m.sigmaX2),), 1.0), tail
    var_y = GammaBlock(1, 1, [(1.0, 1.0)], [(0.5, 1.0)])
    params = MultiFoxHParams(0, (), ((0.0, (1.0, 1.0)),), (var_x, var_y),
                             (t / (2 * m.sigmaX2), t / (2 * m.sigmaY2)), 1.0 / math.sqrt(math.pi))
    return params, tail


def case1_paper_params(m, t):
    """Trivariate form obtained by expanding the 2F1 kernel (variables u3, u1, u2).

    Kept for inspection: its integrand carries Gamma(s_i) in every variable
    together with Gamma(-s_1 - s_2 - s_3), and the first block has both
    Gamma(s) and Gamma(-s), so no set of straight contours separates the
    poles and ``foxh_multi.select_contours`` rejects it.
    """
    zx, zy = m.zx, m.zy
    nu2 = m.nu ** 2
    v3 = GammaBlock(1, 1, [(1.0, 1.0), (0.0, 2.0)], [(0.0, 1.0)])
    v1 = GammaBlock(1, 1, [(1.0, 1.0), (zx, 2.0)], [(zx, 1.0)])
    v2 = GammaBlock(2, 1, [(1.0, 1.0), (zy, 2.0)], [(zy, 1.0), (0.5, 1.0)])
    upper = ((1.0, (-1.0, -1.0, -1.0)), (0.5, (-1.0, -1.0, 0.0)), (1.0, (0.0, -1.0, -1.0)))
    lower = ((1.0, (0.0, -1.0, -1.0)),)
    args = (-t / (4 * nu2), t / nu2, t / nu2)
    return MultiFoxHParams(2, upper, lower, (v3, v1, v2), args, 1.0 / (2 * math.pi))


def case1_direct(m, t, rtol=1e-10):
    """P(X^2 + Y^2 < t) by one quadrature over x = sqrt(t) sin(phi).

    The substitution removes the square-root endpoints; returns (value, abs_error).
    """
    r = math.sqrt(t)
    sx = math.sqrt(m.sigmaX2)
    if m.sigmaY2 == 0:
        lo, hi = (-r - m.nu) / sx, (r - m.nu) / sx
        # difference of upper tails keeps relative accuracy far from the mean
        v = float(ndtr(-lo) - ndtr(-hi)) if hi > 0 else float(ndtr(hi) - ndtr(lo))
        return v, 4e-16 * max(v, 1e-300)
    sy = math.sqrt(2 * m.sigmaY2)

    def f(phi):
        x, c = r * math.sin(phi), r * math.cos(phi)
        return math.exp(-0.5 * ((x - m.nu) / sx) ** 2) * math.erf(c / sy) * c

    # the mass sits near x = nu when it is inside, else at the edge closest to it
    peak = math.asin(max(-1.0, min(1.0, m.nu / r)))
    v, e = quad(f, -math.pi / 2, math.pi / 2, points=[peak], epsabs=0.0, epsrel=rtol, limit=400)
    k = 1 / (math.sqrt(2 * math.pi) * sx)
    return v * k, e * k


def clt_outage(moments, rho, gamma_th, tol=1e-10, form="direct"):
    """CLT outage P(|H_b|^2 < gamma_th / (N^2 rho)).

    Zero-mean noise (uniform) uses the bivariate gamma-ratio H form.  For the
    other models ``form`` picks the evaluation of the same Gaussian law:
    "direct" (default) integrates it in one dimension, "hyper-h" uses the
    Poisson-mixture bivariate H (well conditioned only for moderate N E and
    outage well above ``tol``), and "paper" tries the trivariate kernel
    expansion, which has no admissible contour and raises ConfigurationError.
    """
    t = _threshold(moments, rho, gamma_th)
    if moments.uniform:
        # the gamma ratio tracks N^s only for |Im s| << N and grows beyond, leaving
        # an algebraic tail; the axes are cut at N/2 and the level there is reported
        N = moments.n_elements
        res = foxh_multi.eval(case2_params(N, t), tol=tol, y_max=max(N / 2, 8.0))
        return _clt_result(res.value, res.error)
    if form == "direct":
        v, e = case1_direct(moments, t)
        return _clt_result(v, e)
    if form == "paper":
        res = foxh_multi.eval(case1_paper_params(moments, t), tol=tol)
        return _clt_result(complex(res.value).real, res.error)
    if form != "hyper-h":
        raise ConfigurationError(f"unknown CLT form {form!r}; use direct, hyper-h or paper")
    params, tail = case1_params(moments, t)
    res = foxh_multi.eval(params, tol=tol)
    return _clt_result(res.value, res.error + tail)


def _clt_result(v, err):
    if v < -err - 1e-12 or v > 1 + err + 1e-12:
        raise AccuracyError(f"CLT outage {v:.6g} outside [0, 1] beyond its error {err:.3g}")
    return OutageResult(min(max(float(v), 0.0), 1.0), "clt", float(err))


def clt_asymptotic(moments, rho, gamma_th):
    """High-SNR law of the CLT outage as stated for the gamma-ratio forms.

    Non-zero mean: A_G (rho/gamma_th)^{-(Z_X + 1/2)} with
    A_G = (N^2 nu^2)^{-(Z_X+1/2)} / sqrt(pi) * sqrt(Z_Y) * Gamma(Z_X) / Gamma(-Z_X)
          * Gamma(1/2 - Z_X) / Gamma(3/2 + Z_X),
    zero mean: Gamma(N - 1/2)^2 / Gamma(N)^2 (rho/gamma_th)^{-1}.
    Returned as an OutageResult only when the expression is a probability.
    """
    N = moments.n_elements
    x = rho / gamma_th
    if moments.uniform:
        v = math.exp(2 * (math.lgamma(N - 0.5) - math.lgamma(N))) / x
        return OutageResult(min(v, 1.0), "asymptotic", 0.0)
    v = clt_asymptotic_value(moments, rho, gamma_th)
    if not 0 <= v:
        raise DegenerateParameterError(f"CLT asymptote evaluates to {v:.3g} < 0 for these moments")
    return OutageResult(min(v, 1.0), "asymptotic", 0.0)


def clt_asymptotic_value(moments, rho, gamma_th):
    """Signed value of the non-zero-mean asymptote (no clamping)."""
    N, zx, zy = moments.n_elements, moments.zx, moments.zy
    if math.isinf(zy):
        raise DegenerateParameterError("sigma_Y^2 = 0: the asymptote's sqrt(Z_Y) factor diverges")
    e = zx + 0.5
    log_a, sign = -e * math.log(N ** 2 * moments.nu ** 2) - 0.5 * math.log(math.pi) + 0.5 * math.log(zy), 1
    for arg, pw in ((zx, 1), (-zx, -1), (0.5 - zx, 1), (1.5 + zx, -1)):
        if arg <= 0 and float(arg).is_integer():
            raise DegenerateParameterError(f"Gamma({arg:g}) pole in the asymptote constant")
        log_a += pw * math.lgamma(arg)
        if arg < 0 and math.floor(arg) % 2 == 1:
            sign = -sign
    return sign * math.exp(log_a - e * math.log(rho / gamma_th))


def clt_diversity(model, h_model, g_model, N):
    """N E + 1/2 with E = nu^2 / (1 + K_2 - 2 nu^2); 1 for zero-mean noise."""
    m = clt_moments(model, h_model, g_model, N)
    if m.uniform:
        return 1.0
    return m.zx + 0.5


def clt_e(model, h_model, g_model):
    K1, K2 = char_fn(model, 1.0), char_fn(model, 2.0)
    nu = K1 * mean_amplitude(h_model) * mean_amplitude(g_model)
    return nu ** 2 / (1 + K2 - 2 * nu ** 2)


# exact SNR and the bounds valid when all pairwise phase differences stay within pi/2

def epsilon_min(thetas):
    """min_{n != m} cos(theta_n - theta_m) along the last axis; 1 when N = 1."""
    th = np.asarray(thetas, dtype=float)
    N = th.shape[-1]
    if N < 2:
        return np.ones(th.shape[:-1]) if th.ndim > 1 else 1.0
    # the largest |difference| mod 2pi is what matters; check all pairs
    d = th[..., :, None] - th[..., None, :]
    c = np.cos(d)
    iu = np.triu_indices(N, 1)
    out = c[..., iu[0], iu[1]].min(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SnrBounds:
    lower: np.ndarray
    exact: np.ndarray
    upper: np.ndarray
    exact_pairwise: np.ndarray  # same quantity from the cosine double sum
    guaranteed: np.ndarray  # epsilon_min >= 0


def snr_bounds(h_amps, g_amps, thetas, rho):
    """rho sum a_i^2 <= rho |sum a_i e^{j theta_i}|^2 <= rho (sum a_i)^2 when epsilon_min >= 0.

    Works on one draw (1-D inputs) or a batch (draws x N).
    """
    a = np.asarray(h_amps, dtype=float) * np.asarray(g_amps, dtype=float)
    th = np.asarray(thetas, dtype=float)
    X = (a * np.cos(th)).sum(axis=-1)
    Y = (a * np.sin(th)).sum(axis=-1)
    if th.shape[-1] == 1:
        # one element: |a e^{j theta}|^2 = a^2 exactly, whatever theta is
        exact = rho * (a * a).sum(axis=-1)
    else:
        exact = rho * (X * X + Y * Y)
    pair = rho * np.einsum("...n,...m,...nm->...", a, a, np.cos(th[..., :, None] - th[..., None, :]))
    lower = rho * (a * a).sum(axis=-1)
    upper = rho * a.sum(axis=-1) ** 2
    return SnrBounds(lower, exact, upper, pair, np.asarray(epsilon_min(th)) >= 0)


SUFFICIENT, NOT_GUARANTEED, VIOLATED = "sufficient", "not-guaranteed", "violated-in-sample"


def full_diversity_sufficient(model, sample=None):
    """Tri-state check of the epsilon_min >= 0 sufficient condition.

    Bounded supports of half-width q pi give pairwise differences within
    2 q pi, so q <= 1/4 suffices.  Unbounded or wide supports are only "not
    guaranteed": the condition is sufficient, not necessary.  A sample of
    phase vectors (draws x N) with epsilon_min < 0 anywhere downgrades a
    non-sufficient verdict to "violated-in-sample".
    Returns (verdict, rationale).
    """
    q = model.q
    if q is not None and q <= 0.25:
        why = "no phase error" if q == 0 else f"support half-width {q:g} pi keeps pairwise differences within pi/2"
        return SUFFICIENT, why
    why = ("unbounded support" if model.kind == "gaussian"
           else f"support half-width {q:g} pi allows pairwise differences beyond pi/2")
    if sample is not None and np.any(np.asarray(epsilon_min(sample)) < 0):
        return VIOLATED, why + "; observed epsilon_min < 0"
    return NOT_GUARANTEED, why
