"""Univariate Fox H-function: parameters, Mellin transform and numerical evaluation.

Convention::

    H(z) = 1/(2 pi i) * int_L Theta(s) z^{-s} ds

    Theta(s) = prod_{j<=m} Gamma(b_j + B_j s) prod_{j<=n} Gamma(1 - a_j - A_j s)
               / (prod_{j>n} Gamma(a_j + A_j s) prod_{j>m} Gamma(1 - b_j - B_j s))

A fading amplitude X described by ``FoxHParams`` has pdf
``kappa * H^{m,n}_{p,q}[c x]``.  The contour is the vertical line Re s = tau
inside the strip that separates the left poles (from the b_j) from the right
poles (from the a_j).
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import AccuracyError, ConfigurationError, DomainError
from .special import _log_gamma_raw

MAX_NODES = 2 ** 20
# |integrand| below exp(-37) ~ 1e-16 of its peak is dropped
_LOG_TRUNC = 37.0


@dataclass(frozen=True)
class FoxHParams:
    m: int
    n: int
    upper: tuple  # (a_j, A_j), the first n enter as Gamma(1 - a - A s)
    lower: tuple  # (b_j, B_j), the first m enter as Gamma(b + B s)
    scale: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple((float(a), float(A)) for a, A in self.upper))
        object.__setattr__(self, "lower", tuple((float(b), float(B)) for b, B in self.lower))
        p, q = len(self.upper), len(self.lower)
        if not (0 <= self.n <= p and 0 <= self.m <= q):
            raise ConfigurationError(f"need 0 <= n <= p and 0 <= m <= q, got m={self.m} n={self.n} p={p} q={q}")
        if any(A <= 0 for _, A in self.upper) or any(B <= 0 for _, B in self.lower):
            raise ConfigurationError("all A_j and B_j must be positive")
        if not (self.scale > 0 and self.kappa >= 0):
            raise ConfigurationError("scale must be positive and kappa non-negative")
        left, right = self.strip
        if not left < right:
            raise ConfigurationError(f"no separating strip: left poles reach {left:g}, right poles start at {right:g}")

    @property
    def p(self):
        return len(self.upper)

    @property
    def q(self):
        return len(self.lower)

    @property
    def strip(self):
        left = max((-b / B for b, B in self.lower[: self.m]), default=-math.inf)
        right = min(((1 - a) / A for a, A in self.upper[: self.n]), default=math.inf)
        return left, right

    @property
    def a_star(self):
        A = [w for _, w in self.upper]
        B = [w for _, w in self.lower]
        return sum(A[: self.n]) - sum(A[self.n:]) + sum(B[: self.m]) - sum(B[self.m:])

    def contour(self):
        """Default abscissa: strip midpoint, or one unit inside a half-infinite strip."""
        left, right = self.strip
        if math.isfinite(left) and math.isfinite(right):
            return 0.5 * (left + right)
        if math.isfinite(left):
            return left + 1.0
        if math.isfinite(right):
            return right - 1.0
        return 0.0


@dataclass(frozen=True)
class MixtureFoxH:
    """Weighted sum of Fox-H densities sharing one scale: sum_k w_k kappa_k H_k[c x].

    Evaluated as a single contour integral of sum_k w_k kappa_k Theta_k(s).
    """

    components: tuple  # ((weight, FoxHParams), ...)

    def __post_init__(self):
        comps = tuple((float(w), p) for w, p in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ConfigurationError("empty mixture")
        scales = {p.scale for _, p in comps}
        if max(scales) - min(scales) > 1e-12 * max(scales):
            raise ConfigurationError("mixture components must share the scale")

    @property
    def scale(self):
        return self.components[0][1].scale

    kappa = 1.0

    @property
    def strip(self):
        lo = max(p.strip[0] for _, p in self.components)
        hi = min(p.strip[1] for _, p in self.components)
        return lo, hi

    def contour(self):
        return FoxHParams.contour(self)

    @property
    def m(self):
        return 1

    @property
    def lower(self):
        # the component with the smallest leading exponent decides the x -> 0 limit
        return (min((p.lower[j] for _, p in self.components for j in range(p.m)),
                    key=lambda r: r[0] / r[1]),)


def log_theta(params, s):
    """log Theta(s) on a complex array (principal branches summed)."""
    s = np.asarray(s, dtype=complex)
    if isinstance(params, MixtureFoxH):
        lts = np.array([math.log(w * p.kappa) + log_theta(p, s) for w, p in params.components if w * p.kappa > 0])
        peak = lts.real.max(axis=0)
        return peak + np.log(np.exp(lts - peak).sum(axis=0))
    out = np.zeros(s.shape, dtype=complex)
    for j, (a, A) in enumerate(params.upper):
        if j < params.n:
            out += _log_gamma_raw(1 - a - A * s)
        else:
            out -= _log_gamma_raw(a + A * s)
    for j, (b, B) in enumerate(params.lower):
        if j < params.m:
            out += _log_gamma_raw(b + B * s)
        else:
            out -= _log_gamma_raw(1 - b - B * s)
    return out


@dataclass(frozen=True)
class ConvergenceReport:
    convergent: bool
    strip: tuple
    tau: float
    a_star: float
    decay_exponent: float  # |Theta(tau + iy)| ~ |y|^exponent when a_star == 0
    message: str


def check_convergence(params, tau=None):
    """Classify absolute convergence of the Mellin-Barnes integral on Re s = tau.

    a* > 0 gives exponential decay of |Theta| along the line.  a* = 0 leaves
    algebraic decay |y|^alpha, which is integrable only for alpha < -1.
    """
    if isinstance(params, MixtureFoxH):
        tau = params.contour() if tau is None else tau
        reps = [check_convergence(p, tau) for _, p in params.components]
        worst = min(reps, key=lambda r: (r.convergent, r.a_star, -r.decay_exponent))
        return ConvergenceReport(all(r.convergent for r in reps), params.strip, tau,
                                 worst.a_star, worst.decay_exponent, worst.message)
    tau = params.contour() if tau is None else tau
    left, right = params.strip
    alpha = 0.0
    for j, (a, A) in enumerate(params.upper):
        alpha += (0.5 - a - A * tau) if j < params.n else -(a + A * tau - 0.5)
    for j, (b, B) in enumerate(params.lower):
        alpha += (b + B * tau - 0.5) if j < params.m else -(0.5 - b - B * tau)
    a_star = params.a_star
    if not left < tau < right:
        return ConvergenceReport(False, (left, right), tau, a_star, alpha, "contour outside the strip")
    if a_star > 1e-12:
        return ConvergenceReport(True, (left, right), tau, a_star, alpha, "exponential decay")
    if abs(a_star) <= 1e-12 and alpha < -1:
        return ConvergenceReport(True, (left, right), tau, a_star, alpha, "algebraic decay")
    return ConvergenceReport(False, (left, right), tau, a_star, alpha,
                             "integrand does not decay fast enough on the contour")


def _truncation(logf, y_step=0.25, y_max=2000.0):
    """Smallest T with log|f(y)| below peak - _LOG_TRUNC for all scanned y >= T."""
    ys = np.arange(0.0, y_max + y_step, y_step)
    lf = logf(ys)
    peak = np.max(lf)
    above = np.nonzero(lf > peak - _LOG_TRUNC)[0]
    last = above[-1]
    if last == len(ys) - 1:
        return None
    return ys[min(last + 1, len(ys) - 1)] + y_step


def eval(params, x, tol=1e-10, tau=None):
    """kappa * H[c x] for an array of x >= 0, with an error estimate.

    Trapezoid rule on Re s = tau using conjugate symmetry, truncated where the
    integrand has dropped 16 orders below its peak, step halved until two
    successive estimates agree to ``tol`` (absolute).  Returns (values, error).

    Without an explicit ``tau`` each x gets a contour near the real saddle
    point of Theta(s) z^{-s}, so the integrand is not much larger than the
    result and far-tail values do not drown in cancellation.  Points whose
    saddles are close share one contour.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0) or np.any(~np.isfinite(x)):
        raise DomainError("eval: x must be finite and non-negative")
    rep = check_convergence(params, tau)
    if not rep.convergent:
        raise ConfigurationError(f"Mellin-Barnes integral not convergent: {rep.message}")

    out = np.zeros_like(x)
    err = 0.0
    zero = x == 0
    if np.any(zero):
        out[zero] = _limit_at_zero(params)
    idx = np.nonzero(~zero)[0]
    ktol = tol / max(params.kappa, 1e-300)
    if len(idx) == 0:
        groups = []
    elif tau is not None:
        groups = [(tau, idx)]
    else:
        groups = _saddle_groups(params, np.log(params.scale * x[idx]), idx)
    for t, sub in groups:
        if tau is None:
            # Theta(t + iy) z^{-t-iy} is bounded by its value at y = 0 up to the
            # width of the peak; groups already far below tol are exact zeros
            peak = np.max(_phi(params, np.array([t]), np.log(params.scale * x[sub])))
            if peak < math.log(ktol) - 20.0:
                continue
        if not check_convergence(params, t).convergent:
            t = rep.tau
        v, e = _eval_positive(params, x[sub], ktol, t)
        out[sub] = params.kappa * v
        err = max(err, params.kappa * e)
    return (float(out[0]) if scalar else out), err


def _limit_at_zero(params):
    # leading small-z behaviour is z^{min b_j/B_j} from the rightmost left pole
    expo = min((b / B for b, B in params.lower[: params.m]), default=math.inf)
    if expo > 0:
        return 0.0
    raise DomainError("eval at x = 0: leading exponent is not positive, no finite zero limit")


def _phi(params, tau, logz):
    # log of the integrand magnitude at real s = tau
    return log_theta(params, np.asarray(tau, dtype=complex)).real - tau * logz


def _saddle_groups(params, logz, idx, slack=2.0):
    """Group points by a shared near-saddle contour abscissa.

    The abscissa minimises Theta(tau) z^{-tau} over the strip, kept at least
    min(1/2, width/4) away from the poles.  A group keeps adding points while
    the shared abscissa costs each of them less than e^slack in magnitude.
    """
    left, right = params.strip
    width = right - left
    margin = 0.5 if not math.isfinite(width) else min(0.5, width / 4)
    if math.isfinite(left):
        lo = np.full(logz.shape, left + margin)
    else:
        lo = np.full(logz.shape, min(params.contour(), right - margin) - 2.0)
        # push the lower end out until phi is decreasing towards the right there
        for _ in range(60):
            grow = _phi(params, lo - 1e-3, logz) < _phi(params, lo, logz)
            if not grow.any():
                break
            lo = np.where(grow, lo - 2 * (np.minimum(right - margin, lo + 2.0) - lo + 1.0), lo)
    if math.isfinite(right):
        hi = np.full(logz.shape, right - margin)
    else:
        hi = lo + 2.0
        for _ in range(60):
            grow = _phi(params, hi + 1e-3, logz) < _phi(params, hi, logz)
            if not grow.any():
                break
            hi = np.where(grow, lo + 2 * (hi - lo), hi)
    # vectorised golden section; phi is convex for catalog parameter sets
    g = (math.sqrt(5) - 1) / 2
    a, b = lo.copy(), hi.copy()
    while np.max(b - a) > 0.02:
        c, d = b - g * (b - a), a + g * (b - a)
        left_better = _phi(params, c, logz) < _phi(params, d, logz)
        a, b = np.where(left_better, a, c), np.where(left_better, d, b)
    tau_star = 0.5 * (a + b)
    # phi(t, z) = log|Theta(t)| - t log z, so one log_theta call serves every grouping test
    lt = log_theta(params, tau_star.astype(complex)).real
    best = lt - tau_star * logz
    order = np.argsort(tau_star)
    groups = []
    start = 0
    while start < len(order):
        t = float(tau_star[order[start]])
        rest = order[start:]
        ok = lt[order[start]] - t * logz[rest] - best[rest] < slack
        # contiguous run in saddle order; always at least the first point
        n = len(rest) if ok.all() else max(1, int(np.argmin(ok)))
        groups.append((t, idx[rest[:n]]))
        start += n
    return groups


def _eval_positive(params, x, tol, tau):
    logz = np.log(params.scale * x)

    def logf(y):
        return log_theta(params, tau + 1j * y).real

    T = _truncation(logf)
    if T is None:
        raise AccuracyError("integrand did not decay within |Im s| <= 2000")
    # the step also has to resolve the residual oscillation exp(-i y phi'(tau))
    slope = (_phi(params, tau + 1e-5, logz) - _phi(params, tau - 1e-5, logz)) / 2e-5
    h_cap = min(T / 32.0, math.pi / (4.0 * (np.max(np.abs(slope)) + 1.0)))

    def partial_sum(ys):
        acc = np.zeros_like(logz)
        aacc = np.zeros_like(logz)
        for i in range(0, len(ys), 4096):
            s = tau + 1j * ys[i:i + 4096]
            lt = log_theta(params, s)
            v = np.exp(lt[None, :] - s[None, :] * logz[:, None])
            acc += v.real.sum(axis=1)
            aacc += np.abs(v).sum(axis=1)
        return acc, aacc

    h = T / 32.0
    while h > h_cap:
        h *= 0.5
    ys = np.arange(1, int(round(T / h)) + 1) * h
    f0 = np.exp(log_theta(params, np.array([tau + 0j]))[0] - tau * logz).real
    total, atotal = partial_sum(ys)
    total, atotal = total + 0.5 * f0, atotal + 0.5 * np.abs(f0)
    prev = h / math.pi * total
    diff = np.full_like(prev, np.inf)
    while True:
        if 2 * T / h > MAX_NODES:
            raise AccuracyError(f"eval: node cap {MAX_NODES} reached", achieved=float(np.max(diff)))
        h *= 0.5
        odd = (2 * np.arange(int(round(T / (2 * h)))) + 1) * h
        t, a = partial_sum(odd)
        total, atotal = total + t, atotal + a
        cur = h / math.pi * total
        diff = np.abs(cur - prev)
        prev = cur
        # cancellation floor: a contour pinned next to a pole cannot do better
        floor = 100 * np.finfo(float).eps * h / math.pi * atotal
        if np.all(diff <= np.maximum(tol, floor)):
            return cur, float(np.max(np.maximum(diff, floor)))


def mellin_moment(params, s):
    """E[X^{s-1}] = kappa c^{-s} Theta(s) for real s inside the open strip."""
    left, right = params.strip
    s = float(s)
    if not left < s < right:
        raise DomainError(f"mellin_moment: s = {s:g} outside strip ({left:g}, {right:g})")
    val = np.exp(log_theta(params, np.array([s + 0j]))[0])
    return params.kappa * params.scale ** (-s) * float(val.real)


def product_params(ph, pg):
    """Fox-H parameters of the product of two independent variables.

    Mellin transforms multiply, so the Theta factors concatenate; rows are
    reordered so that the first n (resp. m) rows stay in front.
    """
    upper = ph.upper[: ph.n] + pg.upper[: pg.n] + ph.upper[ph.n:] + pg.upper[pg.n:]
    lower = ph.lower[: ph.m] + pg.lower[: pg.m] + ph.lower[ph.m:] + pg.lower[pg.m:]
    return FoxHParams(ph.m + pg.m, ph.n + pg.n, upper, lower,
                      ph.scale * pg.scale, ph.kappa * pg.kappa)
