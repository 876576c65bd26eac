"""Multivariate Fox H-function evaluated as an N-fold Mellin-Barnes integral.

Convention (z^{+s} kernel)::

    H = multiplier / (2 pi i)^N  int psi(s) prod_i theta_i(s_i) z_i^{s_i} ds

The outer factor psi couples the variables through rows (a; alpha_1..alpha_N):
the first ``outer_n`` upper rows give Gamma(1 - a + sum alpha_i s_i), the
remaining upper rows give 1 / Gamma(a - sum alpha_i s_i), and each lower row
(b; beta) gives 1 / Gamma(1 - b + sum beta_i s_i).

Each theta_i is a ``GammaBlock``::

    theta(s) = prod_{j<=m} Gamma(d_j - delta_j s) prod_{j<=n} Gamma(1 - c_j + gamma_j s)
               / (prod_{j>m} Gamma(1 - d_j + delta_j s) prod_{j>n} Gamma(c_j - gamma_j s))

or a ``HyperBlock``, a product of weighted sums of gamma blocks, which carries
Poisson-mixture representations (Rice, noncentral chi-square) without
multiplying out the series.

For N = 1 a univariate ``FoxHParams`` maps onto this form through s -> -s
with the same (a, A), (b, B) pairs, see ``from_univariate``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import linprog

from .errors import AccuracyError, ConfigurationError, UnsupportedDimensionError
from .special import _log_gamma_raw

MAX_EXACT_VARS = 3
MAX_NODES_PER_DIM = 4096
_LOG_TRUNC = 37.0


def _pairs(rows):
    return tuple((float(a), float(w)) for a, w in rows)


@dataclass(frozen=True)
class GammaBlock:
    m: int
    n: int
    upper: tuple  # (c_j, gamma_j)
    lower: tuple  # (d_j, delta_j)

    def __post_init__(self):
        object.__setattr__(self, "upper", _pairs(self.upper))
        object.__setattr__(self, "lower", _pairs(self.lower))
        if not (0 <= self.n <= len(self.upper) and 0 <= self.m <= len(self.lower)):
            raise ConfigurationError("block orders out of range")
        if any(w <= 0 for _, w in self.upper + self.lower):
            raise ConfigurationError("block coefficients gamma_j, delta_j must be positive")

    @property
    def strip(self):
        left = max(((c - 1) / g for c, g in self.upper[: self.n]), default=-math.inf)
        right = min((d / dl for d, dl in self.lower[: self.m]), default=math.inf)
        return left, right

    def log_theta(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for j, (c, g) in enumerate(self.upper):
            out += _log_gamma_raw(1 - c + g * s) if j < self.n else -_log_gamma_raw(c - g * s)
        for j, (d, dl) in enumerate(self.lower):
            out += _log_gamma_raw(d - dl * s) if j < self.m else -_log_gamma_raw(1 - d + dl * s)
        return out

    def decay_rate(self):
        """Exponential decay rate of |theta(sigma + iy)| in |y| (units of pi/2)."""
        return sum(w for _, w in self.upper[: self.n]) - sum(w for _, w in self.upper[self.n:]) \
            + sum(w for _, w in self.lower[: self.m]) - sum(w for _, w in self.lower[self.m:])


@dataclass(frozen=True)
class HyperBlock:
    """theta(s) = prod_f sum_k w_fk theta_fk(s)."""

    factors: tuple  # tuple of tuples of (weight, GammaBlock)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple((float(w), b) for w, b in f) for f in self.factors))
        if not self.factors or any(not f for f in self.factors):
            raise ConfigurationError("HyperBlock needs at least one non-empty factor")

    @classmethod
    def single(cls, block, weight=1.0):
        return cls(((weight, block),),)

    @property
    def strip(self):
        left, right = -math.inf, math.inf
        for f in self.factors:
            for _, b in f:
                lo, hi = b.strip
                left, right = max(left, lo), min(right, hi)
        return left, right

    def log_theta(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for f in self.factors:
            if len(f) == 1:
                w, b = f[0]
                out += math.log(w) + b.log_theta(s)
                continue
            lts = np.array([math.log(w) + b.log_theta(s) for w, b in f])
            peak = lts.real.max(axis=0)
            out += peak + np.log(np.exp(lts - peak).sum(axis=0))
        return out

    def decay_rate(self):
        return sum(min(b.decay_rate() for _, b in f) for f in self.factors)


@dataclass(frozen=True)
class MultiFoxHParams:
    outer_n: int
    outer_upper: tuple  # (a, (alpha_1..alpha_N))
    outer_lower: tuple  # (b, (beta_1..beta_N))
    per_var: tuple  # GammaBlock or HyperBlock per variable
    args: tuple  # z_i, complex allowed
    multiplier: float = 1.0

    def __post_init__(self):
        N = len(self.per_var)
        object.__setattr__(self, "outer_upper",
                           tuple((float(a), tuple(float(x) for x in al)) for a, al in self.outer_upper))
        object.__setattr__(self, "outer_lower",
                           tuple((float(b), tuple(float(x) for x in be)) for b, be in self.outer_lower))
        object.__setattr__(self, "args", tuple(complex(z) for z in self.args))
        if N == 0 or len(self.args) != N:
            raise ConfigurationError(f"need one argument per variable: {N} blocks, {len(self.args)} args")
        if any(len(w) != N for _, w in self.outer_upper + self.outer_lower):
            raise ConfigurationError("outer row weight vectors must have one entry per variable")
        if not 0 <= self.outer_n <= len(self.outer_upper):
            raise ConfigurationError("outer_n out of range")
        if any(z == 0 for z in self.args):
            raise ConfigurationError("zero argument: the integral degenerates")

    @property
    def nvars(self):
        return len(self.per_var)

    def outer_rows(self):
        """(sign, offset, weights, kind): contributes sign * log Gamma(offset + weights . s)."""
        rows = []
        for j, (a, al) in enumerate(self.outer_upper):
            al = np.array(al)
            rows.append((1, 1 - a, al) if j < self.outer_n else (-1, a, -al))
        for b, be in self.outer_lower:
            rows.append((-1, 1 - b, np.array(be)))
        return rows


def from_univariate(params):
    """N = 1 multivariate form of a univariate ``FoxHParams`` (s -> -s)."""
    block = GammaBlock(params.m, params.n, params.upper, params.lower)
    return MultiFoxHParams(0, (), (), (block,), (params.scale,), 1.0)


def select_contours(params):
    """Abscissae sigma_i separating every pole family, with maximal margin.

    Per-variable strips are intersected with the half-spaces
    Re(1 - a + alpha . sigma) > 0 of the outer numerator rows.  Without outer
    numerators the strip midpoints are used (one unit in from a finite end of
    a half-infinite strip).  Otherwise the Chebyshev centre of the feasible
    polytope is found by linear programming.
    """
    N = params.nvars
    lo, hi = np.empty(N), np.empty(N)
    for i, blk in enumerate(params.per_var):
        L, R = blk.strip
        if not L < R:
            raise ConfigurationError(f"variable {i}: block poles overlap (strip {L:g} .. {R:g})")
        if math.isinf(L) and math.isinf(R):
            L, R = -1.0, 1.0
        elif math.isinf(L):
            L = R - 2.0
        elif math.isinf(R):
            R = L + 2.0
        lo[i], hi[i] = L, R
    num = [(1 - a, np.array(al)) for a, al in params.outer_upper[: params.outer_n]]
    mid = 0.5 * (lo + hi)
    if not num:
        return mid
    # maximise t: sigma_i - lo_i >= t, hi_i - sigma_i >= t, (off + al . sigma) / |al| >= t
    A, b = [], []
    for i in range(N):
        e = np.zeros(N + 1)
        e[i], e[N] = -1.0, 1.0
        A.append(e.copy()); b.append(-lo[i])
        e[i] = 1.0
        A.append(e); b.append(hi[i])
    for off, al in num:
        nrm = np.linalg.norm(al) or 1.0
        A.append(np.concatenate([-al, [nrm]])); b.append(off)
    c = np.zeros(N + 1)
    c[N] = -1.0
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b),
                  bounds=[(None, None)] * N + [(None, 1.0)], method="highs")
    if res.status != 0 or res.x[N] <= 1e-9:
        bad = [f"outer upper row {k} (a={1 - off:g}, alpha={tuple(al)})"
               for k, (off, al) in enumerate(num)
               if res.status == 0 and off + al @ res.x[:N] <= np.linalg.norm(al) * res.x[N] + 1e-9]
        names = "; ".join(bad) or "outer numerator rows vs variable strips"
        raise ConfigurationError(f"no straight contour separates the poles; conflicting: {names}")
    return res.x[:N]


@dataclass(frozen=True)
class MultiHResult:
    value: complex
    error: float
    contour: tuple
    nodes_per_dim: tuple
    truncation: tuple = field(default=())


def _pole_distance(params, sigma):
    """Smallest distance from the abscissae to a pole of any gamma factor."""
    d = math.inf
    for i, blk in enumerate(params.per_var):
        L, R = blk.strip
        d = min(d, sigma[i] - L, R - sigma[i])
    for off, al in [(1 - a, np.array(al)) for a, al in params.outer_upper[: params.outer_n]]:
        d = min(d, (off + al @ sigma) / (np.linalg.norm(al) or 1.0))
    return d


class _Integrand:
    def __init__(self, params, sigma):
        self.p = params
        self.sigma = np.asarray(sigma, dtype=float)
        self.logz = np.log(np.array(params.args, dtype=complex))
        self.rows = params.outer_rows()

    def log_phi(self, i, y):
        s = self.sigma[i] + 1j * np.asarray(y, dtype=float)
        return self.p.per_var[i].log_theta(s) + s * self.logz[i]

    def log_rows(self, s):
        # s: (..., N) complex
        out = np.zeros(s.shape[:-1], dtype=complex)
        for sign, off, w in self.rows:
            out += sign * _log_gamma_raw(off + s @ w)
        return out

    def axis_log_mag(self, i, y):
        s = np.tile(self.sigma.astype(complex), (len(y), 1))
        s[:, i] += 1j * y
        out = self.log_rows(s).real + self.log_phi(i, y).real
        for j in range(self.p.nvars):
            if j != i:
                out += self.log_phi(j, np.zeros(1)).real[0]
        return out


def _axis_truncation(f, i, y_step=0.25, y_max=400.0, cap_ok=False):
    """Truncation point of axis i and the relative integrand level left there."""
    ys = np.arange(0.0, y_max + y_step, y_step)
    both = np.concatenate([f.axis_log_mag(i, ys), f.axis_log_mag(i, -ys)])
    peak = both.max()
    prof = both.reshape(2, -1).max(axis=0) - peak
    keep = np.nonzero(prof > -_LOG_TRUNC)[0]
    if keep[-1] == len(ys) - 1:
        if not cap_ok:
            raise AccuracyError(f"variable {i}: integrand not below 1e-16 of its peak within |Im s| <= {y_max:g}")
        return y_max, float(np.exp(prof[-1]))
    return ys[keep[-1]] + 2 * y_step, math.exp(-_LOG_TRUNC)


def _common_weights(rows, N):
    """Integer weight vector shared by every outer row, or None."""
    if not rows:
        return np.zeros(N, dtype=int)
    w0 = rows[0][2]
    if not all(np.array_equal(w, w0) for _, _, w in rows):
        # rows may differ by overall sign only (upper denominators are stored negated)
        if not all(np.array_equal(np.abs(w), np.abs(w0)) and
                   (np.array_equal(w, w0) or np.array_equal(w, -w0)) for _, _, w in rows):
            return None
    if not np.allclose(w0, np.round(w0)):
        return None
    return np.round(w0).astype(int)


def _grid_sum(f, T, h, max_vars):
    """Trapezoid sum over the lattice h * k, |k| <= T / h; returns (sum, abs_sum)."""
    N = f.p.nvars
    K = [int(math.ceil(Ti / h)) for Ti in T]
    if max(2 * k + 1 for k in K) > MAX_NODES_PER_DIM:
        raise AccuracyError(f"node cap {MAX_NODES_PER_DIM} per dimension reached")
    logs = [f.log_phi(i, h * np.arange(-K[i], K[i] + 1)) for i in range(N)]
    shifts = [lp.real.max() for lp in logs]
    phis = [np.exp(lp - sh) for lp, sh in zip(logs, shifts)]
    scale = sum(shifts)
    w = _common_weights(f.rows, N)
    if w is not None:
        total, atotal = _separable_sum(f, phis, K, w, h)
    else:
        if N > max_vars:
            raise UnsupportedDimensionError(f"{N} coupled variables exceed the tensor-quadrature cap {max_vars}")
        total, atotal = _tensor_sum(f, phis, K, h)
    fac = math.exp(scale) * (h / (2 * math.pi)) ** N
    return total * fac, atotal * fac


def _separable_sum(f, phis, K, w, h):
    """Outer rows depend on s only through w . s: convolve the coupled factors."""
    N = len(phis)
    free = 1.0 + 0j
    afree = 1.0
    coupled = []
    for i in range(N):
        if w[i] == 0:
            free *= phis[i].sum()
            afree *= np.abs(phis[i]).sum()
            continue
        v = phis[i] if w[i] > 0 else phis[i][::-1]
        step = abs(int(w[i]))
        if step > 1:
            up = np.zeros(step * (len(v) - 1) + 1, dtype=complex)
            up[::step] = v
            v = up
        coupled.append((v, step * K[i]))
    if not coupled:
        return free, afree
    conv, aconv, kmin = np.array([1.0 + 0j]), np.array([1.0]), 0
    for v, k in coupled:
        conv = np.convolve(conv, v)
        aconv = np.convolve(aconv, np.abs(v))
        kmin -= k
    kk = kmin + np.arange(len(conv))
    s0 = f.sigma @ w
    # w . s = s0 + i h kk; rows evaluated on that 1-D lattice
    svec = np.zeros((len(kk), N), dtype=complex)
    # put the whole combination into one coordinate with unit weight
    lead = int(np.nonzero(w)[0][0])
    svec[:, lead] = (s0 + 1j * h * kk) / w[lead]
    lg = f.log_rows(svec)
    sh = lg.real.max()
    G = np.exp(lg - sh)
    return free * (G @ conv) * math.exp(sh), afree * (np.abs(G) @ aconv) * math.exp(sh)


def _tensor_sum(f, phis, K, h):
    N = len(phis)
    grids = [h * np.arange(-k, k + 1) for k in K]
    total, atotal = 0j, 0.0
    # chunk over the first variable
    rest = np.stack(np.meshgrid(*grids[1:], indexing="ij"), axis=-1).reshape(-1, N - 1) if N > 1 else np.zeros((1, 0))
    prod_rest = np.ones(len(rest), dtype=complex)
    for i in range(1, N):
        idx = np.round(rest[:, i - 1] / h).astype(int) + K[i]
        prod_rest = prod_rest * phis[i][idx]
    for a, y0 in enumerate(grids[0]):
        s = np.empty((len(rest), N), dtype=complex)
        s[:, 0] = f.sigma[0] + 1j * y0
        s[:, 1:] = f.sigma[1:] + 1j * rest
        vals = phis[0][a] * prod_rest * np.exp(f.log_rows(s))
        total += vals.sum()
        atotal += np.abs(vals).sum()
    return total, atotal


def eval(params, tol=1e-10, max_exact_vars=MAX_EXACT_VARS, sigma=None, trunc_scale=1.0, y_max=None):
    """Evaluate the N-fold Mellin-Barnes integral.

    Tensor-product trapezoid rule with a common step in every variable,
    truncated per axis where the integrand falls 16 orders below its peak.
    The step is halved until two successive sums agree to ``tol`` (absolute).
    Coupling rows that only see a fixed integer combination of the s_i are
    summed by 1-D convolution, so that case scales to many variables.

    ``y_max`` caps every axis at |Im s| <= y_max for kernels whose decay
    is only algebraic far out; the integrand level left at the cap is then
    added to the error estimate.

    Returns ``MultiHResult``; ``value`` is real when every argument is a
    positive real number, complex otherwise.
    """
    N = params.nvars
    if N > max_exact_vars:
        raise UnsupportedDimensionError(
            f"{N} variables exceed max_exact_vars={max_exact_vars}; use Monte Carlo or the asymptotic form")
    sigma = select_contours(params) if sigma is None else np.asarray(sigma, dtype=float)
    f = _Integrand(params, sigma)
    cut = [_axis_truncation(f, i) if y_max is None else _axis_truncation(f, i, y_max=y_max, cap_ok=True)
           for i in range(N)]
    T = [trunc_scale * c[0] for c in cut]
    level = max(c[1] for c in cut)
    d = _pole_distance(params, sigma)
    if not d > 0:
        raise ConfigurationError("contour passes through a pole")
    # trapezoid error ~ exp(-2 pi d / h); start near the point where it drops below tol
    h = min(2 * max(T) / 64, 2 * math.pi * d / max(math.log(1 / tol), 1.0))
    prev, _ = _grid_sum(f, T, h, max_exact_vars)
    diff = math.inf
    while True:
        h *= 0.5
        try:
            cur, acur = _grid_sum(f, T, h, max_exact_vars)
        except AccuracyError as exc:
            raise AccuracyError(f"{exc}; last step change {diff:.3g} > tol {tol:g}", achieved=diff) from None
        diff = abs(cur - prev) * abs(params.multiplier)
        # a capped axis leaves a truncation floor no step refinement can beat
        if diff <= max(tol, 2 * level * acur * abs(params.multiplier)):
            break
        prev = cur
    value = cur * params.multiplier
    err = diff + level * acur * abs(params.multiplier)
    real_args = all(z.imag == 0 and z.real > 0 for z in params.args)
    if real_args:
        value = float(value.real)
    nodes = tuple(2 * int(math.ceil(Ti / h)) + 1 for Ti in T)
    return MultiHResult(value, float(err), tuple(float(x) for x in sigma), nodes, tuple(T))


@dataclass(frozen=True)
class PoleReport:
    zeta: float  # first pole of the right family of theta_l
    index_set: tuple  # lower rows j <= m with a pole at zeta
    multiplicity: int
    orders: tuple  # r_j = delta_j zeta - d_j, the Gamma pole order hit by each row in index_set


def _is_nonneg_int(x, tol=1e-9):
    return x > -tol and abs(x - round(x)) < tol


def block_poles(block):
    """Dominant right pole of a ``GammaBlock`` and the rows that share it."""
    if not isinstance(block, GammaBlock) or block.m == 0:
        raise ConfigurationError("pole enumeration needs a GammaBlock with at least one pole family")
    rows = block.lower[: block.m]
    zeta = min(d / dl for d, dl in rows)
    K, r = [], []
    for j, (d, dl) in enumerate(rows):
        x = dl * zeta - d
        if _is_nonneg_int(x):
            K.append(j)
            r.append(int(round(x)))
    return PoleReport(float(zeta), tuple(K), len(K), tuple(r))


def enumerate_poles(params):
    """Per-variable dominant pole (in s = -u), index set and multiplicity."""
    return [block_poles(b) for b in params.per_var]
