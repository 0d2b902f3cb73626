"""Half-line boundary-layer profiles.

Four profiles are solved on [0, infinity):

    u      the leading-order potential layer:  u'' + f(u) = 0,
           u(0) - gamma u'(0) = phi_bd,  u(inf) = phi*
    v      the curvature correction:  v'' + f'(u) v = u',  homogeneous Robin,
           v(inf) = 0
    theta  the auxiliary linear layer:  theta'' + f'(u) theta = f'(u),
           homogeneous Robin, theta(inf) = 1
    w      the conservation correction:  w'' + f0'(u) w = -f1(u),
           homogeneous Robin, w(inf) = Q

The u-profile conserves u'^2 + 2 F(u) = 0 exactly, which makes u monotone and
lets us parametrize the trajectory in potential space: the time map
t(x) = integral of 1/sqrt(-2F) from x to u(0) is computed by panel quadrature
and inverted per grid node by vectorized Newton steps.  The first integral
therefore holds by construction at every node.  v and w are evaluated from
their closed-form variation-of-parameters representations with all nested
integrals reduced to potential-space quadratures (no tail truncation, no
cancellation from 1/u'^2 blow-up).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    ConfigError,
    DenominatorNearZero,
    GridTooCoarse,
    MismatchedReference,
    NegativeTime,
    NonMonotoneTrajectory,
    RootBracketFailure,
)
from .nonlinearity import Nonlinearity, decay_rate, find_reference_potential
from .numerics import (
    boundary_clustered_nodes,
    cumulative_panel_integral,
    gauss_panels,
    hermite_eval,
    second_difference,
)

DEFAULT_NODES = 20001
TMAX_CAP_FACTOR = 40.0
TAIL_REL_THRESHOLD = 1e-12


@dataclass(frozen=True)
class RobinData:
    """Robin boundary data: value - gamma * derivative = phi_bd at t = 0."""

    gamma: float
    phi_bd: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0 (0 is the Dirichlet limit)")


@dataclass(frozen=True)
class Tail:
    """Exponential tail model value(t) ~ limit + amplitude * exp(-rate t)."""

    limit: float
    amplitude: float
    rate: float


@dataclass(frozen=True)
class Profile:
    """Sampled profile with derivatives and an exponential tail model."""

    kind: str
    t: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    tail: Tail
    robin: RobinData
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.t, self.values, self.derivs):
            arr.setflags(write=False)

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def __call__(self, t):
        return profile_eval(self, t)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,value,derivative\n")
            for ti, vi, di in zip(self.t, self.values, self.derivs):
                fh.write(f"{float(ti)!r},{float(vi)!r},{float(di)!r}\n")

    def to_json_dict(self, include_samples: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "robin": {"gamma": self.robin.gamma, "phi_bd": self.robin.phi_bd},
            "tail": {
                "limit": self.tail.limit,
                "amplitude": self.tail.amplitude,
                "rate": self.tail.rate,
            },
            "t_max": self.t_max,
            "n_nodes": int(len(self.t)),
            "meta": {
                k: v for k, v in sorted(self.meta.items())
                if isinstance(v, (int, float, bool, str))
            },
        }
        if include_samples:
            out["samples"] = {
                "t": self.t.tolist(),
                "value": self.values.tolist(),
                "derivative": self.derivs.tolist(),
            }
        return out


def profile_eval(p: Profile, t):
    """Evaluate (value, derivative) at t >= 0.

    Cubic Hermite interpolation on the samples (exact at nodes); the tail
    model takes over beyond t_max.
    """
    scalar = np.isscalar(t) or getattr(t, "ndim", 0) == 0
    tq = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tq < 0):
        raise NegativeTime("profiles are defined for t >= 0")
    val = np.empty(tq.shape)
    der = np.empty(tq.shape)
    inside = tq <= p.t[-1]
    if inside.any():
        v, d = hermite_eval(tq[inside], p.t, p.values, p.derivs)
        val[inside] = v
        der[inside] = d
    if (~inside).any():
        decay = p.tail.amplitude * np.exp(-p.tail.rate * tq[~inside])
        val[~inside] = p.tail.limit + decay
        der[~inside] = -p.tail.rate * decay
    if scalar:
        return float(val[0]), float(der[0])
    return val, der


# ---------------------------------------------------------------------------
# u-profile
# ---------------------------------------------------------------------------


def boundary_potential(f: Nonlinearity, robin: RobinData) -> float:
    """Boundary value u(0) from the Robin compatibility equation.

    Solves phi_bd - U0 = sgn(phi_bd - phi*) * gamma * sqrt(-2 F(U0)) for U0
    strictly between phi* and phi_bd (U0 = phi_bd in the Dirichlet limit).
    """
    phi_star = f.phi_star if f.phi_star is not None else find_reference_potential(f)
    phi_bd = robin.phi_bd
    if phi_bd == phi_star or robin.gamma == 0.0:
        return float(phi_bd)
    sgn = 1.0 if phi_bd > phi_star else -1.0

    def g(x):
        return phi_bd - x - sgn * robin.gamma * math.sqrt(max(-2.0 * float(f.F(x)), 0.0))

    lo, hi = (phi_star, phi_bd) if phi_bd > phi_star else (phi_bd, phi_star)
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0:
        raise RootBracketFailure(
            f"no sign change for the boundary value on [{lo}, {hi}]"
        )
    # g is strictly decreasing between phi* and phi_bd
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
        if (g(mid) > 0) == (glo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _from_delta(fn, phi_star, delta):
    """Evaluate fn at phi_star + delta, via the delta-native path when the
    evaluator provides one (exact for exponentially small offsets)."""
    fd = getattr(fn, "from_delta", None)
    if fd is not None:
        return np.asarray(fd(delta), dtype=float)
    return np.asarray(fn(phi_star + np.asarray(delta, dtype=float)), dtype=float)


def _speed_from_delta(f: Nonlinearity, phi_star: float):
    def speed(delta):
        return np.sqrt(np.maximum(-2.0 * _from_delta(f.F, phi_star, delta), 0.0))

    return speed


def _constant_profile(kind, level, t_max, n_nodes, robin, rate, meta):
    t = np.linspace(0.0, t_max, n_nodes)
    z = np.zeros(n_nodes)
    return Profile(
        kind=kind,
        t=t,
        values=np.full(n_nodes, float(level)),
        derivs=z,
        tail=Tail(limit=float(level), amplitude=0.0, rate=rate),
        robin=robin,
        meta=dict(meta, degenerate=True),
    )


def solve_u(f: Nonlinearity, robin: RobinData, n_nodes: int = DEFAULT_NODES) -> Profile:
    """Solve the leading-order layer profile.

    The trajectory satisfies u'(t) = sgn(phi* - phi_bd) sqrt(-2 F(u)) exactly,
    so nodes are produced by inverting the potential-space time map; the
    first-integral identity u'^2 + 2F(u) = 0 holds at every node by
    construction.
    """
    if not f.monotone:
        raise ConfigError("u-profile requires a monotone charge density")
    phi_star = f.phi_star if f.phi_star is not None else find_reference_potential(f)
    u0 = boundary_potential(f, robin)
    hull = (min(phi_star, robin.phi_bd), max(phi_star, robin.phi_bd))
    mu = math.sqrt(-float(f.df(phi_star)))
    m_f = decay_rate(f, hull) if hull[0] < hull[1] else mu
    base_meta = {
        "phi_star": phi_star,
        "u0": u0,
        "mu": mu,
        "m_f": m_f,
    }
    delta0 = u0 - phi_star
    if delta0 == 0.0 or abs(delta0) <= 1e-14 * max(1.0, abs(phi_star)):
        meta = dict(base_meta, u0_prime=0.0, int_usq=0.0)
        return _constant_profile("u", phi_star, TMAX_CAP_FACTOR / m_f, n_nodes, robin, mu, meta)

    sgn_du = 1.0 if phi_star > u0 else -1.0  # sign of u'
    speed = _speed_from_delta(f, phi_star)
    u0_prime = sgn_du * float(speed(delta0)[0])

    # potential-space table: log-spaced offsets from phi*, from |delta0| down
    # to the tail threshold; t(delta) by cumulative panel quadrature of
    # 1/speed; everything runs on the offset delta = u - phi* so that the
    # exponentially small tail keeps full relative accuracy
    n_table = max(4 * int(math.sqrt(n_nodes)) + 1000, 2000)
    decades = -math.log10(TAIL_REL_THRESHOLD)
    frac = np.logspace(0.0, -decades, n_table)
    table_d = delta0 * frac  # from delta0 toward 0
    table_t = np.abs(cumulative_panel_integral(lambda x: 1.0 / speed(x), table_d))
    t_cap = TMAX_CAP_FACTOR / m_f
    t_max = min(float(table_t[-1]), t_cap)

    t = boundary_clustered_nodes(n_nodes, t_max)
    inv = PchipInterpolator(table_t, table_d)
    delta = inv(np.clip(t, table_t[0], table_t[-1]))
    # Newton-correct the inversion: t(delta) evaluated from the nearest
    # table node by one quadrature panel
    idx = np.clip(np.searchsorted(table_t, t) - 1, 0, n_table - 1)
    for _ in range(3):
        x, wq = gauss_panels(table_d[idx], delta)
        tau = table_t[idx] + np.abs(np.sum((1.0 / speed(x.ravel())).reshape(x.shape) * wq, axis=1))
        delta = delta + (t - tau) * sgn_du * speed(delta)
    delta[0] = delta0
    if delta0 > 0:
        delta = np.maximum(delta, 0.0)
        if np.any(np.diff(delta) >= 0):
            raise NonMonotoneTrajectory("u lost strict monotonicity")
    else:
        delta = np.minimum(delta, 0.0)
        if np.any(np.diff(delta) <= 0):
            raise NonMonotoneTrajectory("u lost strict monotonicity")
    du = sgn_du * speed(delta)
    du[0] = u0_prime

    int_usq = float(np.abs(cumulative_panel_integral(speed, np.concatenate(([0.0], table_d[::-1]))))[-1])

    # tail amplitude: least squares on log offsets over the last 10% of nodes
    k = max(n_nodes // 10, 10)
    resid = np.abs(delta[-k:])
    good = resid > 0
    if good.any():
        amp = math.exp(float(np.mean(np.log(resid[good]) + mu * t[-k:][good])))
    else:
        amp = 0.0
    tail = Tail(limit=phi_star, amplitude=math.copysign(amp, delta0), rate=mu)
    delta.setflags(write=False)
    meta = dict(base_meta, u0_prime=u0_prime, int_usq=int_usq, delta=delta)
    return Profile(kind="u", t=t, values=phi_star + delta, derivs=du, tail=tail, robin=robin, meta=meta)


# ---------------------------------------------------------------------------
# shared machinery for the linear corrections
# ---------------------------------------------------------------------------


class _LayerQuadrature:
    """Samples of u at the grid nodes and interior Gauss points, with the
    backward energy integral I(t) = integral of u'^2 from t to infinity
    evaluated in potential space."""

    def __init__(self, u: Profile, f: Nonlinearity):
        t = u.t
        self.t = t
        self.phi_star = u.meta["phi_star"]
        self.sgn_du = math.copysign(1.0, u.meta["u0_prime"])
        n = len(t)
        xg, wg = gauss_panels(t[:-1], t[1:])
        self.wg = wg
        m = (n - 1) * 6 + 1
        ts = np.empty(m)
        ts[::6] = t
        pos = np.arange(n - 1) * 6
        ts[(pos[:, None] + np.arange(1, 6)).ravel()] = xg.ravel()
        delta_nodes = np.asarray(u.meta.get("delta", u.values - self.phi_star), dtype=float)
        d_all = np.empty(m)
        d_all[::6] = delta_nodes
        dg, _ = hermite_eval(xg.ravel(), t, delta_nodes, u.derivs)
        d_all[(pos[:, None] + np.arange(1, 6)).ravel()] = dg
        self.ts = ts
        self.delta_all = d_all
        self.u_all = self.phi_star + d_all
        speed = _speed_from_delta(f, self.phi_star)
        self.du_all = self.sgn_du * speed(d_all)
        self.du_all[0] = u.meta["u0_prime"]
        self.minus_2F = np.maximum(-2.0 * _from_delta(f.F, self.phi_star, d_all), 0.0)
        # I(t) = |integral of speed from offset 0 to delta(t)|, accumulated
        # from the reference end
        seq = np.concatenate(([0.0], d_all[::-1]))
        g = np.abs(cumulative_panel_integral(speed, seq))
        self.energy_all = g[1:][::-1]
        self.int_usq = float(g[-1])

    def cumulative(self, integrand_all: np.ndarray) -> np.ndarray:
        """Cumulative integral over the node grid of a quantity sampled on
        the merged node+Gauss sequence."""
        shaped = integrand_all[
            (np.arange(len(self.t) - 1)[:, None] * 6 + np.arange(1, 6)).ravel()
        ].reshape(-1, 5)
        inc = np.sum(shaped * self.wg, axis=1)
        out = np.empty(len(self.t))
        out[0] = 0.0
        np.cumsum(inc, out=out[1:])
        return out

    @property
    def nodes(self) -> slice:
        return slice(None, None, 6)


def _fit_tail(t, values, limit, window=(0.55, 0.92), fallback_rate=1.0):
    """Fit value ~ limit + c exp(-mu t) on a mid-tail window by least squares
    in log space; falls back to the supplied rate when the window is empty."""
    resid = values - limit
    t_lo, t_hi = window[0] * t[-1], window[1] * t[-1]
    sel = (t >= t_lo) & (t <= t_hi) & (np.abs(resid) > 1e-280)
    if np.count_nonzero(sel) < 8:
        return Tail(limit=float(limit), amplitude=0.0, rate=fallback_rate)
    x = t[sel]
    y = np.log(np.abs(resid[sel]))
    slope, intercept = np.polyfit(x, y, 1)
    rate = -float(slope)
    if not rate > 0:
        rate = fallback_rate
        intercept = float(np.mean(y + rate * x))
    sign = math.copysign(1.0, float(np.median(resid[sel])))
    return Tail(limit=float(limit), amplitude=sign * math.exp(float(intercept)), rate=rate)


def _denominator(u: Profile, f: Nonlinearity, gamma: float) -> float:
    d = u.meta["u0_prime"] + gamma * float(f.f(u.meta["u0"]))
    if abs(d) <= 1e-300:
        raise DenominatorNearZero("u'(0) + gamma f(u(0)) vanished")
    return d


def solve_v(u: Profile, f: Nonlinearity, robin: RobinData) -> Profile:
    """Curvature-correction profile from its variation-of-parameters form."""
    if u.meta.get("degenerate") or u.meta["u0_prime"] == 0.0:
        return _constant_profile(
            "v", 0.0, u.t_max, len(u.t), robin, u.meta.get("mu", 1.0),
            {"v0": 0.0, "v_prime0": 0.0, "t_star": math.nan},
        )
    lq = _LayerQuadrature(u, f)
    u0p = u.meta["u0_prime"]
    den = _denominator(u, f, robin.gamma)
    v0 = -robin.gamma / den * lq.int_usq
    v_prime0 = -lq.int_usq / den
    ratio_all = lq.energy_all / lq.minus_2F  # I(t) / u'(t)^2, bounded
    a = lq.cumulative(ratio_all)
    du_nodes = u.derivs
    v = du_nodes * (v0 / u0p - a)
    f_nodes = _from_delta(f.f, lq.phi_star, lq.delta_all[lq.nodes])
    energy_nodes = lq.energy_all[lq.nodes]
    dv = -f_nodes * (v0 / u0p - a) - energy_nodes / du_nodes
    dv[0] = v_prime0
    mu = u.meta["mu"]
    tail = _fit_tail(u.t, v, 0.0, fallback_rate=mu)
    # extremum location by parabolic refinement of the grid argmax
    j = int(np.argmax(np.abs(v)))
    if 0 < j < len(v) - 1:
        c2, c1, _ = np.polyfit(u.t[j - 1 : j + 2] - u.t[j], v[j - 1 : j + 2], 2)
        t_star = u.t[j] - c1 / (2.0 * c2) if c2 != 0 else u.t[j]
    else:
        t_star = u.t[j]
    meta = {"v0": v0, "v_prime0": v_prime0, "t_star": float(t_star), "mu_u": mu}
    return Profile(kind="v", t=u.t, values=v, derivs=dv, tail=tail, robin=robin, meta=meta)


def solve_theta(u: Profile, f0: Nonlinearity, robin: RobinData) -> Profile:
    """Auxiliary linear layer theta = 1 - u' / (u'(0) + gamma f0(u(0)))."""
    if u.meta.get("degenerate") or u.meta["u0_prime"] == 0.0:
        return _constant_profile(
            "theta", 1.0, u.t_max, len(u.t), robin, u.meta.get("mu", 1.0),
            {"theta_prime0": 0.0},
        )
    den = _denominator(u, f0, robin.gamma)
    theta = 1.0 - u.derivs / den
    delta = np.asarray(u.meta.get("delta", u.values - u.meta["phi_star"]), dtype=float)
    dtheta = _from_delta(f0.f, u.meta["phi_star"], delta) / den
    mu = u.meta["mu"]
    k = max(len(u.t) // 10, 10)
    resid = theta[-k:] - 1.0
    good = np.abs(resid) > 0
    if good.any():
        amp = math.exp(float(np.mean(np.log(np.abs(resid[good])) + mu * u.t[-k:][good])))
        amp = math.copysign(amp, float(np.median(resid[good])))
    else:
        amp = 0.0
    meta = {"theta_prime0": float(dtheta[0]), "den": den}
    return Profile(
        kind="theta", t=u.t, values=theta, derivs=dtheta,
        tail=Tail(limit=1.0, amplitude=amp, rate=mu), robin=robin, meta=meta,
    )


def solve_w(
    u: Profile,
    f0: Nonlinearity,
    f1: Nonlinearity,
    q: float,
    robin: RobinData,
) -> Profile:
    """Conservation-correction profile from its variation-of-parameters form.

    The forcing enters through the antiderivative of f1 anchored at the bulk
    potential: Q f0(u) - Fhat1(u) = -F1(u).
    """
    if f1.provenance != "f1":
        raise MismatchedReference("solve_w needs the combined first-order density")
    if abs(f1.meta.get("q", math.nan) - q) > 1e-12 * max(1.0, abs(q)):
        raise MismatchedReference("f1 was built with a different drift constant")
    limit = -float(f1.f(u.meta["phi_star"])) / float(f0.df(u.meta["phi_star"]))
    if u.meta.get("degenerate") or u.meta["u0_prime"] == 0.0:
        return _constant_profile(
            "w", q, u.t_max, len(u.t), robin, u.meta.get("mu", 1.0),
            {"w0": q, "w_prime0": 0.0, "q": q},
        )
    lq = _LayerQuadrature(u, f0)
    u0p = u.meta["u0_prime"]
    den = _denominator(u, f0, robin.gamma)
    neg_F1_all = -_from_delta(f1.F, lq.phi_star, lq.delta_all)
    w0 = robin.gamma * neg_F1_all[0] / den
    w_prime0 = neg_F1_all[0] / den
    a = lq.cumulative(neg_F1_all / lq.minus_2F)
    w = u.derivs * (w0 / u0p + a)
    f0_nodes = _from_delta(f0.f, lq.phi_star, lq.delta_all[lq.nodes])
    dw = -f0_nodes * (w0 / u0p + a) + neg_F1_all[lq.nodes] / u.derivs
    dw[0] = w_prime0
    tail = _fit_tail(u.t, w, limit, fallback_rate=u.meta["mu"])
    meta = {"w0": float(w0), "w_prime0": float(w_prime0), "q": float(q), "limit": limit}
    return Profile(kind="w", t=u.t, values=w, derivs=dw, tail=tail, robin=robin, meta=meta)


# ---------------------------------------------------------------------------
# residual diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquationSpec:
    """Descriptor of the half-line equation a profile is expected to solve.

    kind 'u' needs f; 'v' and 'theta' need f and the background u; 'w' needs
    f (the limiting density), f1 and the background u.
    """

    kind: str
    f: Nonlinearity
    u: Profile | None = None
    f1: Nonlinearity | None = None


def ode_residual(p: Profile, eq: EquationSpec) -> float:
    """Max |y'' - rhs| over interior nodes by nonuniform second differences."""
    if len(p.t) < 5:
        raise GridTooCoarse("need at least 5 nodes for the residual")
    d2 = second_difference(p.t, p.values)
    y = p.values[1:-1]
    if eq.kind == "u":
        rhs = -np.asarray(eq.f.f(y), dtype=float)
    else:
        if eq.u is None:
            raise ConfigError("background u profile required")
        ub, dub = profile_eval(eq.u, p.t[1:-1])
        dfu = np.asarray(eq.f.df(ub), dtype=float)
        if eq.kind == "v":
            rhs = dub - dfu * y
        elif eq.kind == "theta":
            rhs = dfu * (1.0 - y)
        elif eq.kind == "w":
            if eq.f1 is None:
                raise ConfigError("w residual requires f1")
            rhs = -dfu * y - np.asarray(eq.f1.f(ub), dtype=float)
        else:
            raise ConfigError(f"unknown equation kind {eq.kind!r}")
    return float(np.max(np.abs(d2 - rhs)))


def first_integral_drift(u: Profile, f: Nonlinearity) -> float:
    """max_t |u'^2 + 2F(u)|, the conserved-quantity drift."""
    return float(np.max(np.abs(u.derivs**2 + 2.0 * np.asarray(f.F(u.values), dtype=float))))


def time_integral_usq(u: Profile) -> float:
    """Integral of u'^2 over [0, inf) by time-space panel quadrature plus the
    closed-form tail; cross-checks the potential-space value in meta."""
    t = u.t
    xg, wg = gauss_panels(t[:-1], t[1:])
    _, dug = hermite_eval(xg.ravel(), t, u.values, u.derivs)
    body = float(np.sum(dug.reshape(xg.shape) ** 2 * wg))
    c, mu = u.tail.amplitude, u.tail.rate
    return body + mu * c * c * math.exp(-2.0 * mu * t[-1]) / 2.0
