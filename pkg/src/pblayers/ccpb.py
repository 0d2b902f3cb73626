"""Global constants of the conserved-charge model.

The zero-order bulk potential phi0* solves a nested algebraic system: for a
candidate value s, each boundary value u_k(0; s) is pinned by the Robin
compatibility equation, and s itself is pinned by the zero-total-flux
condition sum_k |bd_k| u_k'(0; s) = 0.  The flux sum is strictly monotone in
s and changes sign between the extreme boundary potentials, so a guarded
bisection finds it.

On top of phi0* sit the layer profiles u_k, v_k, theta_k, the signed mass
corrections mhat_i (half-line integrals of the layer excess), the drift
constant Q (a quotient of boundary sums), and the conservation-correction
profiles w_k.  Two independent identities are evaluated as diagnostics: the
signed mass corrections are charge-neutral, and the curvature-weighted sum
of v_k'(0) balances the area-weighted sum of w_k'(0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AllBoundaryPotentialsEqual,
    BracketFailure,
    ConfigError,
    DegenerateDenominator,
)
from .geometry import DomainSpec
from .nonlinearity import (
    IonSpecies,
    Nonlinearity,
    check_neutrality,
    make_f0,
    make_f1,
    make_fhat1,
)
from .numerics import gauss_panels
from .profiles import (
    Profile,
    RobinData,
    boundary_potential,
    solve_theta,
    solve_u,
    solve_v,
    solve_w,
)

PHI0_TOL = 1e-14


@dataclass(frozen=True)
class CcpbConstants:
    """Constants and profiles of the conserved-charge expansion."""

    phi0_star: float
    u0_per_boundary: tuple[float, ...]
    q: float
    mhat: tuple[float, ...]
    bulk_conc0: tuple[float, ...]
    profiles: tuple[dict, ...]  # one {"u","v","theta","w"} per boundary
    f0: Nonlinearity
    fhat1: Nonlinearity
    f1: Nonlinearity
    species: tuple[IonSpecies, ...]
    domain: DomainSpec
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "phi0_star": self.phi0_star,
            "u0_per_boundary": list(self.u0_per_boundary),
            "q": self.q,
            "mhat": list(self.mhat),
            "bulk_conc0": list(self.bulk_conc0),
            "species": [
                {"z": s.z, "amount": s.amount, "role": s.role} for s in self.species
            ],
            "boundaries": [
                {
                    "k": k,
                    "u0": self.u0_per_boundary[k],
                    "u0_prime": self.profiles[k]["u"].meta["u0_prime"],
                    "v_prime0": self.profiles[k]["v"].meta["v_prime0"],
                    "theta_prime0": self.profiles[k]["theta"].meta["theta_prime0"],
                    "w0": self.profiles[k]["w"].meta["w0"],
                    "w_prime0": self.profiles[k]["w"].meta["w_prime0"],
                }
                for k in range(len(self.profiles))
            ],
            "diagnostics": {k: v for k, v in sorted(self.diagnostics.items())},
        }

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _flux_sum(domain: DomainSpec, species, s: float):
    """sum_k |bd_k| u_k'(0; s) with u_k(0; s) from the compatibility equation.

    Strictly increasing in s; zero exactly at the bulk potential.
    """
    volume = domain.volume
    f0 = make_f0(species, volume, s)
    total = 0.0
    u0s = []
    for comp in domain.components:
        u0 = boundary_potential(f0, comp.robin)
        u0s.append(u0)
        sgn = math.copysign(1.0, s - comp.robin.phi_bd) if comp.robin.phi_bd != s else 0.0
        du0 = sgn * math.sqrt(max(-2.0 * float(f0.F(u0)), 0.0))
        total += comp.surface_area * du0
    return total, u0s


def solve_phi0(domain: DomainSpec, species: Sequence[IonSpecies]):
    """Bulk potential and boundary values of the conserved-charge layer.

    Returns (phi0_star, [u_k(0)]).
    """
    check_neutrality(species)
    phis = [c.robin.phi_bd for c in domain.components]
    lo, hi = min(phis), max(phis)
    if lo == hi:
        raise AllBoundaryPotentialsEqual("not-all-equal boundary potentials required")
    span = hi - lo
    a = lo + 1e-12 * span
    b = hi - 1e-12 * span
    ra, _ = _flux_sum(domain, species, a)
    rb, _ = _flux_sum(domain, species, b)
    if not (ra < 0 < rb):
        raise BracketFailure(
            f"flux sum does not change sign on ({lo}, {hi}): R({a})={ra:.3e}, R({b})={rb:.3e}"
        )
    for _ in range(200):
        mid = 0.5 * (a + b)
        if b - a <= PHI0_TOL * max(1.0, abs(mid)):
            break
        rm, _ = _flux_sum(domain, species, mid)
        if rm < 0:
            a = mid
        else:
            b = mid
    phi0 = 0.5 * (a + b)
    _, u0s = _flux_sum(domain, species, phi0)
    return phi0, u0s


def layer_excess_integrals(
    u: Profile, f0: Nonlinearity, zs: Sequence[float], phi0_star: float,
    n_panels: int = 2000,
):
    """Half-line integrals of 1 - exp(-z (u(s) - phi0*)) per valence z.

    Evaluated in potential space with the layer speed |u'| = sqrt(-2 F0(u)):
    the integrand is bounded and the interval finite, so there is no tail
    truncation.
    """
    if u.meta.get("degenerate") or u.meta["u0_prime"] == 0.0:
        return [0.0 for _ in zs]
    delta0 = u.meta["u0"] - phi0_star
    x = np.linspace(min(0.0, delta0), max(0.0, delta0), n_panels + 1)
    xg, wg = gauss_panels(x[:-1], x[1:])
    from .profiles import _speed_from_delta  # shared with the profile solvers

    speed = _speed_from_delta(f0, phi0_star)(xg.ravel()).reshape(xg.shape)
    out = []
    for z in zs:
        h = -np.expm1(-z * xg)
        out.append(float(np.sum(h / speed * wg)))
    return out


def compute_mhat(
    domain: DomainSpec,
    species: Sequence[IonSpecies],
    u_profiles: Sequence[Profile],
    phi0_star: float,
):
    """Signed mass corrections mhat_i from the per-boundary layer excess."""
    zs = [s.z for s in species]
    volume = domain.volume
    f0 = make_f0(species, volume, phi0_star)
    acc = np.zeros(len(species))
    for comp, u in zip(domain.components, u_profiles):
        integrals = layer_excess_integrals(u, f0, zs, phi0_star)
        acc += comp.surface_area * np.asarray(integrals)
    return [s.amount / volume * float(a) for s, a in zip(species, acc)]


def compute_q(
    domain: DomainSpec,
    f0: Nonlinearity,
    fhat1: Nonlinearity,
    u_profiles: Sequence[Profile],
) -> float:
    """Drift constant of the bulk potential: a quotient of boundary sums
    mixing the first-order mass antiderivative, curvature integrals and the
    layer energies."""
    num = 0.0
    den = 0.0
    d = domain.dimension
    for comp, u in zip(domain.components, u_profiles):
        u0 = u.meta["u0"]
        u0p = u.meta["u0_prime"]
        dk = u0p + comp.robin.gamma * float(f0.f(u0))
        num += (
            comp.surface_area * float(fhat1.F(u0))
            + (d - 1) * comp.curvature_integral * u.meta["int_usq"]
        ) / dk
        term = comp.surface_area * float(f0.f(u0)) / dk
        den += term
    if den <= 0:
        raise DegenerateDenominator(
            f"drift denominator {den:.3e} not positive; degenerate configuration"
        )
    return num / den


def ccpb_constants(
    domain: DomainSpec,
    species: Sequence[IonSpecies],
    n_nodes: int | None = None,
) -> CcpbConstants:
    """Full constants pipeline: bulk potential, profiles, mass corrections,
    drift constant, conservation profiles and diagnostics."""
    domain.require_ccpb_admissible()
    check_neutrality(species)
    phi0, u0s = solve_phi0(domain, species)
    f0 = make_f0(species, domain.volume, phi0)
    kwargs = {} if n_nodes is None else {"n_nodes": n_nodes}
    bundles = []
    u_list = []
    for comp, u0_expected in zip(domain.components, u0s):
        u = solve_u(f0, comp.robin, **kwargs)
        if abs(u.meta["u0"] - u0_expected) > 1e-9 * max(1.0, abs(u0_expected)):
            raise ConfigError("profile boundary value disagrees with the scan")
        v = solve_v(u, f0, RobinData(comp.robin.gamma, 0.0))
        theta = solve_theta(u, f0, RobinData(comp.robin.gamma, 0.0))
        bundles.append({"u": u, "v": v, "theta": theta})
        u_list.append(u)

    mhat = compute_mhat(domain, species, u_list, phi0)
    fhat1 = make_fhat1(species, domain.volume, phi0, mhat)
    q = compute_q(domain, f0, fhat1, u_list)
    f1 = make_f1(f0, fhat1, q)
    for comp, bundle in zip(domain.components, bundles):
        bundle["w"] = solve_w(bundle["u"], f0, f1, q, RobinData(comp.robin.gamma, 0.0))

    # diagnostics: compatibility residuals, flux balance, neutrality of the
    # corrections, and the independent balance identity for q
    res_compat = 0.0
    flux = 0.0
    balance_v = 0.0
    balance_w = 0.0
    d = domain.dimension
    for comp, bundle, u0 in zip(domain.components, bundles, u0s):
        u = bundle["u"]
        sgn = math.copysign(1.0, comp.robin.phi_bd - phi0) if comp.robin.phi_bd != phi0 else 0.0
        res_compat = max(
            res_compat,
            abs(
                comp.robin.phi_bd
                - u0
                - sgn * comp.robin.gamma * math.sqrt(max(-2.0 * float(f0.F(u0)), 0.0))
            ),
        )
        flux += comp.surface_area * u.meta["u0_prime"]
        balance_v += (d - 1) * comp.curvature_integral * bundle["v"].meta["v_prime0"]
        balance_w += comp.surface_area * bundle["w"].meta["w_prime0"]
    mhat_charge = sum(m * s.z for m, s in zip(mhat, species))
    mhat_scale = sum(abs(m * s.z) for m, s in zip(mhat, species)) or 1.0
    balance_scale = abs(balance_v) + abs(balance_w) or 1.0
    area_scale = sum(c.surface_area * abs(b["u"].meta["u0_prime"]) for c, b in zip(domain.components, bundles)) or 1.0
    diagnostics = {
        "compatibility_residual": res_compat,
        "flux_residual": abs(flux),
        "flux_residual_rel": abs(flux) / area_scale,
        "mhat_charge": mhat_charge,
        "mhat_charge_rel": abs(mhat_charge) / mhat_scale,
        "drift_balance": balance_v + balance_w,
        "drift_balance_rel": abs(balance_v + balance_w) / balance_scale,
    }
    bulk0 = [s.amount * math.exp(s.z * phi0) / domain.volume for s in species]
    return CcpbConstants(
        phi0_star=phi0,
        u0_per_boundary=tuple(u0s),
        q=q,
        mhat=tuple(mhat),
        bulk_conc0=tuple(bulk0),
        profiles=tuple(bundles),
        f0=f0,
        fhat1=fhat1,
        f1=f1,
        species=tuple(species),
        domain=domain,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class BulkExpansionEntry:
    """Two-term small-eps expansions of one species' bulk data."""

    z: float
    conc0: float
    conc_coeff: float
    normalizer0: float
    normalizer_coeff: float

    def conc_at(self, eps: float) -> float:
        return self.conc0 + math.sqrt(eps) * self.conc_coeff

    def normalizer_at(self, eps: float) -> float:
        return self.normalizer0 + math.sqrt(eps) * self.normalizer_coeff


def bulk_expansion(constants: CcpbConstants, eps: float):
    """Per-species bulk concentration and normalizer expansions at eps."""
    if not eps > 0:
        raise ConfigError("eps must be positive")
    out = []
    vol = constants.domain.volume
    for s, mh in zip(constants.species, constants.mhat):
        e = math.exp(s.z * constants.phi0_star)
        conc0 = s.amount * e / vol
        coeff = (s.amount * s.z * constants.q * e + mh * e) / vol
        a0 = vol / e
        a_coeff = (-s.z * constants.q * vol - (mh / s.amount) * vol) / e
        out.append(
            BulkExpansionEntry(
                z=s.z, conc0=conc0, conc_coeff=coeff,
                normalizer0=a0, normalizer_coeff=a_coeff,
            )
        )
    return out
