"""Admissible domains: an outer shell minus separated holes.

Builders cover disks, balls and spherical annuli with analytic volume,
surface areas and mean curvature.  The curvature sign convention follows the
distance function: the Laplacian of dist(x, boundary k) approaches
-(d-1) H at that boundary, which makes H = 1/R on a sphere of radius R seen
from inside and H = -1/a on a spherical hole of radius a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadRadii, ConfigError, InconsistentParams
from .profiles import RobinData

REGION_I = "I"
REGION_II = "II"
REGION_III = "III"


@dataclass(frozen=True)
class BoundaryComponent:
    """One boundary component with area, curvature data and Robin data."""

    index: int
    surface_area: float
    mean_curvature: float | None  # constant-curvature components
    curvature_integral: float  # integral of H over the component
    robin: RobinData
    orientation: str = "outer"  # "outer" shell or "hole"
    curvature_fn: Callable | None = None  # curvature vs curve parameter
    radius: float | None = None  # spherical components only

    def __post_init__(self):
        if not self.surface_area > 0:
            raise ConfigError("surface area must be positive")
        if self.orientation not in ("outer", "hole"):
            raise ConfigError("orientation must be 'outer' or 'hole'")

    def curvature_at(self, s=0.0) -> float:
        if self.mean_curvature is not None:
            return self.mean_curvature
        return float(self.curvature_fn(s))


@dataclass(frozen=True)
class DomainSpec:
    """Domain description: dimension, volume and boundary components."""

    dimension: int
    volume: float
    components: tuple[BoundaryComponent, ...]
    well_separated: bool = True

    def __post_init__(self):
        if self.dimension < 2:
            raise ConfigError("dimension must be >= 2")
        if not self.volume > 0:
            raise ConfigError("volume must be positive")
        if not self.components:
            raise ConfigError("need at least one boundary component")

    @property
    def holes(self) -> int:
        return len(self.components) - 1

    def require_ccpb_admissible(self):
        """Conserved-charge runs need a hole and not-all-equal potentials."""
        phis = [c.robin.phi_bd for c in self.components]
        if max(phis) == min(phis):
            from .errors import AllBoundaryPotentialsEqual

            raise AllBoundaryPotentialsEqual(
                "boundary potentials are all equal; the solution is constant"
            )


@dataclass(frozen=True)
class RegionParams:
    """Band parameters: Region I within T sqrt(eps) of a boundary, Region II
    out to eps**beta, Region III beyond."""

    eps: float
    beta: float
    T: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not 0 < self.beta < 0.5:
            raise ConfigError("beta must lie in (0, 1/2)")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.inner_width >= self.outer_width:
            raise InconsistentParams(
                f"T*sqrt(eps) = {self.inner_width:.3e} must be below "
                f"eps**beta = {self.outer_width:.3e}"
            )

    @property
    def inner_width(self) -> float:
        return self.T * math.sqrt(self.eps)

    @property
    def outer_width(self) -> float:
        return self.eps**self.beta

    @property
    def stretched_outer(self) -> float:
        """Region II upper limit in the stretched coordinate, eps**(beta-1/2)."""
        return self.eps ** (self.beta - 0.5)


def _ball_volume(d: int, r: float) -> float:
    return math.pi ** (d / 2) * r**d / math.gamma(d / 2 + 1)


def _sphere_area(d: int, r: float) -> float:
    return d * _ball_volume(d, r) / r


def unit_sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return _sphere_area(d, 1.0)


def make_disk(radius: float, robin: RobinData | None = None) -> DomainSpec:
    return make_ball(2, radius, robin)


def make_ball(d: int, radius: float, robin: RobinData | None = None) -> DomainSpec:
    if not radius > 0:
        raise BadRadii("radius must be positive")
    robin = robin or RobinData(0.0, 1.0)
    area = _sphere_area(d, radius)
    h = 1.0 / radius
    comp = BoundaryComponent(
        index=0, surface_area=area, mean_curvature=h,
        curvature_integral=h * area, robin=robin, orientation="outer",
        radius=radius,
    )
    return DomainSpec(dimension=d, volume=_ball_volume(d, radius), components=(comp,))


def make_annulus(
    d: int,
    inner_radius: float,
    outer_radius: float,
    robin_outer: RobinData | None = None,
    robin_inner: RobinData | None = None,
) -> DomainSpec:
    if not 0 < inner_radius < outer_radius:
        raise BadRadii("need 0 < a < R")
    robin_outer = robin_outer or RobinData(0.0, 1.0)
    robin_inner = robin_inner or RobinData(0.0, -1.0)
    area_out = _sphere_area(d, outer_radius)
    area_in = _sphere_area(d, inner_radius)
    h_out = 1.0 / outer_radius
    h_in = -1.0 / inner_radius  # hole boundary curves away from the domain
    outer = BoundaryComponent(
        index=0, surface_area=area_out, mean_curvature=h_out,
        curvature_integral=h_out * area_out, robin=robin_outer, orientation="outer",
        radius=outer_radius,
    )
    inner = BoundaryComponent(
        index=1, surface_area=area_in, mean_curvature=h_in,
        curvature_integral=h_in * area_in, robin=robin_inner, orientation="hole",
        radius=inner_radius,
    )
    return DomainSpec(
        dimension=d,
        volume=_ball_volume(d, outer_radius) - _ball_volume(d, inner_radius),
        components=(outer, inner),
    )


def make_curve_component(
    index: int,
    curve: Callable,
    robin: RobinData,
    orientation: str = "outer",
    n_samples: int = 4096,
) -> BoundaryComponent:
    """Planar boundary component from a closed parametrization theta -> (x, y).

    Arc length and the curvature integral come from spectral-density FD on a
    periodic sample; curvature is signed with respect to the enclosed domain
    (holes flip the sign).  d = 2 only.
    """
    theta = np.linspace(0.0, 2.0 * math.pi, n_samples, endpoint=False)
    pts = np.asarray([curve(th) for th in theta], dtype=float)
    h = theta[1] - theta[0]
    dp = (np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)) / (2 * h)
    d2p = (np.roll(pts, -1, axis=0) - 2 * pts + np.roll(pts, 1, axis=0)) / h**2
    speed = np.hypot(dp[:, 0], dp[:, 1])
    kappa = (dp[:, 0] * d2p[:, 1] - dp[:, 1] * d2p[:, 0]) / speed**3
    if orientation == "hole":
        kappa = -kappa
    arclen = float(np.sum(speed) * h)
    kint = float(np.sum(kappa * speed) * h)

    def curvature_fn(s):
        j = int(round(s / h)) % n_samples
        return kappa[j]

    return BoundaryComponent(
        index=index, surface_area=arclen, mean_curvature=None,
        curvature_integral=kint, robin=robin, orientation=orientation,
        curvature_fn=curvature_fn,
    )


def classify_point(
    domain: DomainSpec, k: int, distance: float, params: RegionParams
) -> str:
    """Region of a point at the given distance from boundary component k.

    Region I: distance < T sqrt(eps); Region II: up to and including
    eps**beta; Region III: beyond.  The distance is to component k; Region
    III additionally presumes it is the distance to the full boundary.
    """
    if k < 0 or k >= len(domain.components):
        raise ConfigError(f"no boundary component {k}")
    if distance < 0:
        raise ConfigError("distance must be >= 0")
    if distance < params.inner_width:
        return REGION_I
    if distance <= params.outer_width:
        return REGION_II
    return REGION_III


def steiner_factor(h: float, t: float, eps: float, d: int) -> float:
    """Leading-order area ratio of the surface parallel at depth t sqrt(eps):
    1 - t sqrt(eps) (d-1) H."""
    if t < 0:
        raise ConfigError("t must be >= 0")
    return 1.0 - t * math.sqrt(eps) * (d - 1) * h
