"""Expansion formulas in the boundary layer.

Evaluators return the displayed finite terms of the small-eps expansions:
potential, normal field coefficient, charge density, Maxwell traction, and
the band-wise total charge.  Remainder behavior is not modeled here; it is
checked against the radial oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, InconsistentParams, ModelProfileMismatch
from .geometry import DomainSpec, RegionParams
from .nonlinearity import Nonlinearity
from .profiles import profile_eval

PB = "pb"
CCPB = "ccpb"


@dataclass(frozen=True)
class ExpansionQuery:
    """Where and what to evaluate: model, boundary index, mean curvature at
    the boundary point, stretched depth t, eps, expansion order, dimension."""

    model: str
    k: int
    h: float  # mean curvature H(p)
    t: float
    eps: float
    order: int = 2
    d: int = 2

    def __post_init__(self):
        if self.model not in (PB, CCPB):
            raise ConfigError("model must be 'pb' or 'ccpb'")
        if self.order not in (1, 2):
            raise ConfigError("order must be 1 or 2")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if self.t < 0:
            raise ConfigError("t must be >= 0")


def _require(profiles: dict, q: ExpansionQuery):
    if "u" not in profiles or "v" not in profiles:
        raise ModelProfileMismatch("profiles must contain 'u' and 'v'")
    if q.model == CCPB and q.order == 2 and "w" not in profiles:
        raise ModelProfileMismatch("conserved-charge queries need the 'w' profile")


def potential(q: ExpansionQuery, profiles: dict) -> float:
    """u(t) [+ sqrt(eps)((d-1) H v(t) (+ w(t) for conserved charge))]."""
    _require(profiles, q)
    u, _ = profile_eval(profiles["u"], q.t)
    if q.order == 1:
        return float(u)
    v, _ = profile_eval(profiles["v"], q.t)
    corr = (q.d - 1) * q.h * v
    if q.model == CCPB:
        w, _ = profile_eval(profiles["w"], q.t)
        corr += w
    return float(u + math.sqrt(q.eps) * corr)


def field_normal_component(q: ExpansionQuery, profiles: dict) -> float:
    """Coefficient of -nu_p in the gradient: u'/sqrt(eps) [+ (d-1)H v' + w']."""
    _require(profiles, q)
    _, du = profile_eval(profiles["u"], q.t)
    if q.order == 1:
        return float(du / math.sqrt(q.eps))
    _, dv = profile_eval(profiles["v"], q.t)
    corr = (q.d - 1) * q.h * dv
    if q.model == CCPB:
        _, dw = profile_eval(profiles["w"], q.t)
        corr += dw
    return float(du / math.sqrt(q.eps) + corr)


def charge_density(q: ExpansionQuery, profiles: dict, f: Nonlinearity,
                   f1: Nonlinearity | None = None) -> float:
    """f(u) [+ sqrt(eps)((d-1)H f'(u) v  (+ f'(u) w + f1(u) for conserved
    charge))]."""
    _require(profiles, q)
    u, _ = profile_eval(profiles["u"], q.t)
    base = float(f.f(u))
    if q.order == 1:
        return base
    v, _ = profile_eval(profiles["v"], q.t)
    corr = (q.d - 1) * q.h * float(f.df(u)) * v
    if q.model == CCPB:
        if f1 is None:
            raise ModelProfileMismatch("conserved-charge density needs f1")
        w, _ = profile_eval(profiles["w"], q.t)
        corr += float(f.df(u)) * w + float(f1.f(u))
    return base + math.sqrt(q.eps) * corr


def maxwell_traction(q: ExpansionQuery, profiles: dict, f: Nonlinearity) -> float:
    """Normal-normal component of the electrostatic stress acting on nu_p:
    -F(u) [+ sqrt(eps) u' ((d-1)H v' (+ w'))]."""
    _require(profiles, q)
    u, du = profile_eval(profiles["u"], q.t)
    base = -float(f.F(u))
    if q.order == 1:
        return base
    _, dv = profile_eval(profiles["v"], q.t)
    corr = (q.d - 1) * q.h * du * dv
    if q.model == CCPB:
        _, dw = profile_eval(profiles["w"], q.t)
        corr += du * dw
    return base + math.sqrt(q.eps) * corr


@dataclass(frozen=True)
class RegionChargeReport:
    """Two-term band charges near one boundary component.

    region3 is an upper BOUND on the magnitude of the far-field charge, not
    a value; it must never be summed with the band values.
    """

    model: str
    k: int
    eps: float
    beta: float
    T: float
    region1: float
    region2: float
    region3_bound: float
    sign: int  # expected common sign of regions I and II
    terms: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "k": self.k,
            "inputs": {"eps": self.eps, "beta": self.beta, "T": self.T},
            "region1": {"value": self.region1},
            "region2": {"value": self.region2},
            "region3": {"bound": self.region3_bound, "is_bound": True},
            "sign": self.sign,
            "terms": {k: v for k, v in sorted(self.terms.items())},
        }


def region_charge(
    domain: DomainSpec,
    k: int,
    params: RegionParams,
    profiles: dict,
    model: str = PB,
    envelope: tuple[float, float] = (1.0, 1.0),
) -> RegionChargeReport:
    """Two-term total charge in the near-boundary bands of component k.

    Region I:  sqrt(eps)|bd|(u'(0) - u'(T))
               + eps[(d-1)(int H)(T u'(T) + v'(0) - v'(T)) (+ |bd|(w'(0)-w'(T)))]
    Region II: sqrt(eps)|bd| u'(T)
               + eps[(d-1)(int H)(-T u'(T) + v'(T)) (+ |bd| w'(T))]
    Region III magnitude bound: sqrt(eps) M' exp(-M eps**(beta-1/2)).
    """
    comp = domain.components[k]
    u = profiles["u"]
    v = profiles["v"]
    d = domain.dimension
    T = params.T
    eps = params.eps
    sq = math.sqrt(eps)
    _, du0 = profile_eval(u, 0.0)
    _, duT = profile_eval(u, T)
    _, dv0 = profile_eval(v, 0.0)
    _, dvT = profile_eval(v, T)
    area = comp.surface_area
    hint = comp.curvature_integral
    r1 = sq * area * (du0 - duT) + eps * (d - 1) * hint * (T * duT + dv0 - dvT)
    r2 = sq * area * duT + eps * ((d - 1) * hint * (-T * duT + dvT))
    terms = {
        "du0": du0, "duT": duT, "dv0": dv0, "dvT": dvT,
        "area": area, "curvature_integral": hint,
    }
    if model == CCPB:
        if "w" not in profiles:
            raise ModelProfileMismatch("conserved-charge region charges need 'w'")
        _, dw0 = profile_eval(profiles["w"], 0.0)
        _, dwT = profile_eval(profiles["w"], T)
        r1 += eps * area * (dw0 - dwT)
        r2 += eps * area * dwT
        terms["dw0"] = dw0
        terms["dwT"] = dwT
    m_prime, m_rate = envelope
    r3 = sq * m_prime * math.exp(-m_rate * params.stretched_outer)
    phi_bd = u.robin.phi_bd
    phi_star = u.meta.get("phi_star", 0.0)
    sign = 0 if phi_bd == phi_star else (-1 if phi_bd > phi_star else 1)
    return RegionChargeReport(
        model=model, k=k, eps=eps, beta=params.beta, T=T,
        region1=r1, region2=r2, region3_bound=r3, sign=sign, terms=terms,
    )


def decay_envelope(kind: str, m_prime: float, m_rate: float, *, t: float | None = None,
                   eps: float | None = None, beta: float | None = None) -> float:
    """Exponential bound M' exp(-M t) (Region II, per stretched depth t) or
    M' exp(-M eps**(beta-1/2)) (Region III, per eps and beta)."""
    if not (m_prime > 0 and m_rate > 0):
        raise ConfigError("envelope constants must be positive")
    if kind == "regionII":
        if t is None or t < 0:
            raise ConfigError("Region II envelope needs t >= 0")
        return m_prime * math.exp(-m_rate * t)
    if kind == "regionIII":
        if eps is None or beta is None:
            raise ConfigError("Region III envelope needs eps and beta")
        if not 0 < beta < 0.5:
            raise InconsistentParams("beta must lie in (0, 1/2)")
        return m_prime * math.exp(-m_rate * eps ** (beta - 0.5))
    raise ConfigError("kind must be 'regionII' or 'regionIII'")


def grid_rows(q_template: ExpansionQuery, profiles: dict, f: Nonlinearity,
              ts, f1: Nonlinearity | None = None):
    """CSV-ready (t, eps, value) rows for the four pointwise evaluators."""
    rows = {"potential": [], "field": [], "charge_density": [], "traction": []}
    for t in ts:
        q = ExpansionQuery(q_template.model, q_template.k, q_template.h,
                           float(t), q_template.eps, q_template.order, q_template.d)
        rows["potential"].append((float(t), q.eps, potential(q, profiles)))
        rows["field"].append((float(t), q.eps, field_normal_component(q, profiles)))
        rows["charge_density"].append((float(t), q.eps, charge_density(q, profiles, f, f1)))
        rows["traction"].append((float(t), q.eps, maxwell_traction(q, profiles, f)))
    return rows
