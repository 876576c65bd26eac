"""High-SNR behaviour of the exact outage: poles, diversity order, coding gain.

As rho -> infinity the argument c~_l y of every variable goes to zero and the
N-fold integral is dominated by the residue at each variable's first pole
s = zeta_l.  If N~_l gamma factors share that pole it has order N~_l and the
residue carries ln(1 / (c~_l y))^{N~_l - 1}.  The result is

    P ~ tau / Gamma(1 + sum zeta) prod_l Theta~_l ln(1/(c~_l y))^{N~_l - 1} (c~_l y)^{zeta_l}

with y^2 = gamma_th / rho, hence diversity order sum zeta_l / 2.
"""

from dataclasses import dataclass
import math

from .errors import ConfigurationError, DegenerateParameterError, UnsupportedScenarioError
from .fading import to_foxh
from .foxh_multi import block_poles
from .outage import OutageResult, element_block

SIMPLE, COINCIDENT, MIXED = "simple-poles", "coincident-poles", "mixed"


@dataclass(frozen=True)
class DiversityReport:
    G_d: float
    scenario: str
    G_c: float  # nan when the scenario has no closed-form coding gain
    log_correction_power: int
    per_element_zeta: tuple
    rho_dependent: bool


def _is_rice_link(link):
    kinds = {m.kind for e in link.elements for m in e}
    if "rice" in kinds:
        if kinds != {"rice"}:
            raise ConfigurationError("asymptotics support Rice on both hops, or no Rice at all")
        return True
    return False


def _elements(link):
    out = []
    for h, g in link.elements:
        ph, pg = to_foxh(h), to_foxh(g)
        out.append((element_block(ph, pg), ph.scale * pg.scale, ph.kappa * pg.kappa / (ph.scale * pg.scale)))
    return out


def classify_scenario(link):
    """``simple-poles`` if every element's first pole is simple, ``coincident-poles``
    if every one is multiple, ``mixed`` otherwise."""
    if _is_rice_link(link):
        return COINCIDENT
    mult = [block_poles(b).multiplicity for b, _, _ in _elements(link)]
    if all(k == 1 for k in mult):
        return SIMPLE
    if all(k > 1 for k in mult):
        return COINCIDENT
    return MIXED


def _lgamma_signed(x, what):
    if x <= 0 and float(x).is_integer():
        raise DegenerateParameterError(f"Gamma({x:g}) in {what} hits a pole")
    return math.lgamma(x), (1 if x > 0 or math.floor(x) % 2 == 0 else -1)


def theta_tilde(block, zeta=None):
    """Leading residue coefficient of one element at its first pole zeta.

    (1 / Gamma(N~)) prod_{k in K} (-1)^{r_k} / (r_k! delta_k) times the
    remaining gamma factors of the block evaluated at s = zeta.
    """
    rep = block_poles(block)
    if zeta is None:
        zeta = rep.zeta
    elif abs(zeta - rep.zeta) > 1e-12:
        raise ConfigurationError(f"zeta = {zeta:g} is not the block's first pole {rep.zeta:g}")
    logv, sign = -math.lgamma(rep.multiplicity), 1
    for j, r in zip(rep.index_set, rep.orders):
        logv -= math.lgamma(r + 1) + math.log(block.lower[j][1])
        sign *= (-1) ** r
    terms = []
    for j, (c, g) in enumerate(block.upper):
        terms.append((1 - c + g * zeta, 1) if j < block.n else (c - g * zeta, -1))
    for j, (d, dl) in enumerate(block.lower):
        if j < block.m:
            if j not in rep.index_set:
                terms.append((d - dl * zeta, 1))
        else:
            terms.append((1 - d + dl * zeta, -1))
    for x, e in terms:
        lg, sg = _lgamma_signed(x, "theta_tilde")
        logv += e * lg
        sign *= sg
    return sign * math.exp(logv)


def diversity_order(link):
    """Sum of the per-element first poles, halved."""
    if _is_rice_link(link):
        return float(link.n_elements)
    return sum(block_poles(b).zeta for b, _, _ in _elements(link)) / 2.0




def asymptotic_outage(link, rho=None):
    """Leading high-SNR term of the exact outage at the link's (rho, gamma_th)."""
    if rho is not None:
        link = link.with_snr(rho=rho)
    y = math.sqrt(link.rho_t)
    if _is_rice_link(link):
        return OutageResult(min(_rice_asymptote(link, y), 1.0), "asymptotic", 0.0)
    els = _elements(link)
    poles = [block_poles(b) for b, _, _ in els]
    zsum = sum(p.zeta for p in poles)
    log_p = -math.lgamma(1 + zsum)
    sign = 1
    for (b, c, kap), p in zip(els, poles):
        th = theta_tilde(b, p.zeta)
        sign *= 1 if th > 0 else -1
        arg = c * y
        if p.multiplicity > 1:
            L = -math.log(arg)
            if L <= 0:
                raise ConfigurationError("asymptote needs c~ sqrt(gamma_th/rho) < 1 (high-SNR regime)")
            log_p += (p.multiplicity - 1) * math.log(L)
        log_p += math.log(kap) + math.log(abs(th)) + p.zeta * math.log(arg)
    if sign < 0:
        raise DegenerateParameterError("negative leading coefficient: the dominant residue cancels")
    return OutageResult(min(math.exp(log_p), 1.0), "asymptotic", 0.0)


def _rice_asymptote(link, y):
    # dominant k = t = 0 term of the Poisson mixture on every element
    N = link.n_elements
    log_p = -math.lgamma(1 + 2 * N)
    for h, g in link.elements:
        Kh, Kg = h.K, g.K
        d2 = (1 + Kh) * (1 + Kg)
        L = math.log(1 / (d2 * y * y))
        if L <= 0:
            raise ConfigurationError("asymptote needs Delta^2 gamma_th / rho < 1 (high-SNR regime)")
        log_p += math.log(2 * d2) - (Kh + Kg) + math.log(L) + 2 * math.log(y)
    return math.exp(log_p)


def coding_gain(link, rho=None):
    """G_c with asymptotic_outage = (G_c rho)^{-G_d}.

    For coincident poles G_c inherits the ln rho factors and depends on rho.
    Mixed pole structures are refused.
    """
    if rho is not None:
        link = link.with_snr(rho=rho)
    scen = classify_scenario(link)
    if scen == MIXED:
        raise UnsupportedScenarioError("coding gain is not defined for mixed simple/coincident pole structures")
    gd = diversity_order(link)
    p = asymptotic_outage(link).probability
    return p ** (-1.0 / gd) / link.rho


def diversity_report(link, rho=None):
    if rho is not None:
        link = link.with_snr(rho=rho)
    scen = classify_scenario(link)
    gd = diversity_order(link)
    if _is_rice_link(link):
        zetas = (2.0,) * link.n_elements
        logp = link.n_elements
    else:
        poles = [block_poles(b) for b, _, _ in _elements(link)]
        zetas = tuple(p.zeta for p in poles)
        logp = sum(p.multiplicity - 1 for p in poles)
    gc = coding_gain(link) if scen != MIXED else math.nan
    return DiversityReport(gd, scen, gc, logp, zetas, logp > 0)
