"""Ionic charge-density functions.

A Nonlinearity bundles a charge density f(phi), its derivative, and the
antiderivative F(phi) anchored at the reference potential (F(phi*) = 0,
F' = f).  The built-in provenances are exponential sums over ion species:

    classical   f(phi) = sum_i z_i c_i exp(-z_i phi)
    f0          f0(phi) = (1/|Omega|) sum_i m_i z_i exp(-z_i (phi - phi0*))
    fhat1       same shape with signed coefficients mhat_i (no zero/monotone
                contract)
    f1          f1 = -Q f0' + fhat1

Evaluators accept floats or numpy arrays, are immutable after construction,
and are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AllSameSignValences,
    ConfigError,
    MismatchedReference,
    NeutralityViolated,
    NonDecreasingDetected,
    NoSignChange,
    UnsupportedProvenance,
)

NEUTRALITY_TOL = 1e-12
_EXP_GUARD = 700.0  # exponents beyond this go through the stabilized path
_TAYLOR_TERMS = 12


@dataclass(frozen=True)
class IonSpecies:
    """One ion species: valence z != 0 and a positive amount.

    role 'bulk' marks a bulk concentration (classical PB); role 'mass' marks
    a total mass (conserved-charge model).
    """

    z: float
    amount: float
    role: str = "bulk"

    def __post_init__(self):
        if self.z == 0:
            raise ConfigError("ion valence must be nonzero")
        if not self.amount > 0:
            raise ConfigError("ion amount must be positive")
        if self.role not in ("bulk", "mass"):
            raise ConfigError(f"unknown species role {self.role!r}")


def check_neutrality(species: Sequence[IonSpecies], tol: float = NEUTRALITY_TOL):
    """Raise NeutralityViolated unless sum(m_i z_i) = 0 within tol (relative)."""
    total = sum(s.amount * s.z for s in species)
    scale = sum(abs(s.amount * s.z) for s in species)
    if scale == 0 or abs(total) > tol * scale:
        raise NeutralityViolated(
            f"sum(m_i z_i) = {total:.3e} (scale {scale:.3e}); species must be neutral"
        )


class _ExpSum:
    """E(phi) = sum_i a_i exp(b_i (phi - ref)), with stable evaluation.

    Large exponents are evaluated by factoring out the dominant one, so the
    sign survives even when the magnitude overflows (the value is then +-inf).
    """

    __slots__ = ("a", "b", "ref")

    def __init__(self, a, b, ref=0.0):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.ref = float(ref)

    def __call__(self, phi):
        if np.isscalar(phi) or getattr(phi, "ndim", 0) == 0:
            return self._scalar(float(phi))
        phi = np.asarray(phi, dtype=float)
        t = np.multiply.outer(phi - self.ref, self.b)
        m = t.max(axis=-1)
        big = m > _EXP_GUARD
        if not big.any():
            return np.exp(t) @ self.a
        out = np.exp(t - m[..., None]) @ self.a
        safe = np.where(big, 0.0, m)
        out = out * np.exp(safe)
        if big.any():
            out = np.where(big, np.where(out > 0, np.inf, np.where(out < 0, -np.inf, 0.0)), out)
        return out

    def _scalar(self, phi: float) -> float:
        d = phi - self.ref
        m = max(bi * d for bi in self.b)
        if m <= _EXP_GUARD:
            total = 0.0
            for ai, bi in zip(self.a, self.b):
                total += ai * math.exp(bi * d)
            return total
        total = 0.0
        for ai, bi in zip(self.a, self.b):
            total += ai * math.exp(bi * d - m)
        if total == 0.0:
            return 0.0
        return math.inf if total > 0 else -math.inf

    def derivative(self) -> "_ExpSum":
        return _ExpSum(self.a * self.b, self.b, self.ref)

    def with_anchor(self, anchor: float) -> "_AnchoredExpSum":
        return _AnchoredExpSum(self.a, self.b, self.ref, anchor)


class _AnchoredExpSum(_ExpSum):
    """_ExpSum whose terms nearly cancel at `anchor` (e.g. f(phi*) = 0).

    Within a small window around the anchor the plain sum loses relative
    accuracy to cancellation, so a Taylor expansion about the anchor is used
    there instead.
    """

    __slots__ = ("anchor", "_taylor", "_switch")

    def __init__(self, a, b, ref, anchor):
        super().__init__(a, b, ref)
        self.anchor = float(anchor)
        w = self.a * np.exp(self.b * (self.anchor - self.ref))
        coeffs = np.empty(_TAYLOR_TERMS + 1)
        fact = 1.0
        coeffs[0] = float(np.sum(w))
        for n in range(1, _TAYLOR_TERMS + 1):
            fact *= n
            coeffs[n] = float(np.sum(w * self.b**n)) / fact
        self._taylor = coeffs
        self._switch = 0.05 / max(1.0, float(np.max(np.abs(self.b))))

    def __call__(self, phi):
        scalar = np.isscalar(phi) or getattr(phi, "ndim", 0) == 0
        p = np.atleast_1d(np.asarray(phi, dtype=float))
        out = self.from_delta(p - self.anchor)
        return float(out[0]) if scalar else out.reshape(np.shape(phi))

    def from_delta(self, delta):
        """Evaluate at anchor + delta with delta supplied exactly; preserves
        relative accuracy for exponentially small offsets."""
        d = np.atleast_1d(np.asarray(delta, dtype=float))
        near = np.abs(d) <= self._switch
        out = np.empty(d.shape)
        if near.any():
            dn = d[near]
            acc = np.full(dn.shape, self._taylor[_TAYLOR_TERMS])
            for n in range(_TAYLOR_TERMS - 1, -1, -1):
                acc = acc * dn + self._taylor[n]
            out[near] = acc
        if (~near).any():
            out[~near] = super().__call__(self.anchor + d[~near])
        return out

    def _scalar(self, phi: float) -> float:
        d = phi - self.anchor
        if abs(d) <= self._switch:
            acc = self._taylor[_TAYLOR_TERMS]
            for n in range(_TAYLOR_TERMS - 1, -1, -1):
                acc = acc * d + self._taylor[n]
            return acc
        return super()._scalar(phi)


class _ExpSumAntiderivative:
    """F(phi) = integral of an _ExpSum from `anchor`, cancellation-safe.

    Near the anchor the exponential terms cancel to higher order, so the
    closed form loses precision; a Taylor expansion about the anchor is used
    there instead.
    """

    __slots__ = ("esum", "anchor", "_w_over_b", "_taylor", "_switch")

    def __init__(self, esum: _ExpSum, anchor: float):
        self.esum = esum
        self.anchor = float(anchor)
        w = esum.a * np.exp(esum.b * (self.anchor - esum.ref))
        self._w_over_b = w / esum.b
        # F(anchor + d) = sum_{n>=1} f^(n-1)(anchor) d^n / n!
        coeffs = np.zeros(_TAYLOR_TERMS + 1)
        fact = 1.0
        for n in range(1, _TAYLOR_TERMS + 1):
            fact *= n
            coeffs[n] = float(np.sum(w * esum.b ** (n - 1))) / fact
        self._taylor = coeffs
        bmax = float(np.max(np.abs(esum.b)))
        self._switch = 0.05 / max(1.0, bmax)

    def __call__(self, phi):
        scalar = np.isscalar(phi) or getattr(phi, "ndim", 0) == 0
        d = np.atleast_1d(np.asarray(phi, dtype=float)) - self.anchor
        out = self.from_delta(d)
        return float(out[0]) if scalar else out.reshape(np.shape(phi))

    def from_delta(self, delta):
        """Evaluate at anchor + delta with delta supplied exactly."""
        d = np.atleast_1d(np.asarray(delta, dtype=float))
        out = np.empty(d.shape, dtype=float)
        near = np.abs(d) <= self._switch
        if near.any():
            dn = d[near]
            acc = np.zeros(dn.shape)
            for n in range(_TAYLOR_TERMS, 0, -1):
                acc = (acc + self._taylor[n]) * dn
            out[near] = acc
        far = ~near
        if far.any():
            t = np.multiply.outer(d[far], self.esum.b)
            val = np.expm1(np.minimum(t, _EXP_GUARD)) @ self._w_over_b
            overflow = t.max(axis=-1) > _EXP_GUARD
            if overflow.any():
                # the fastest-growing term decides the sign at huge arguments
                lead = np.argmax(t, axis=-1)
                val = np.where(overflow, np.sign(self._w_over_b[lead]) * np.inf, val)
            out[far] = val
        return out


@dataclass(frozen=True)
class Nonlinearity:
    """Charge density f with derivative, antiderivative and reference data."""

    f: Callable
    df: Callable
    F: Callable
    phi_star: float | None
    provenance: str
    species: tuple[IonSpecies, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        """Whether this provenance carries the strictly-decreasing contract."""
        return self.provenance in ("classical", "f0", "custom")


def _exp_terms_nonlinearity(a, b, ref, provenance, species=(), phi_star=None, meta=None):
    esum = _ExpSum(a, b, ref)
    desum = esum.derivative()
    if phi_star is None:
        phi_star = _find_zero_expsum(esum)
    anti = _ExpSumAntiderivative(esum, phi_star)
    return Nonlinearity(
        f=esum.with_anchor(phi_star),  # terms cancel at phi*; Taylor there
        df=desum,
        F=anti,
        phi_star=phi_star,
        provenance=provenance,
        species=tuple(species),
        meta=meta or {},
    )


def make_classical_pb(species: Sequence[IonSpecies]) -> Nonlinearity:
    """Classical PB charge density f(phi) = sum z_i c_i exp(-z_i phi)."""
    if not species:
        raise ConfigError("species list is empty")
    zs = [s.z for s in species]
    if all(z > 0 for z in zs) or all(z < 0 for z in zs):
        raise AllSameSignValences(
            "need at least one positive and one negative valence"
        )
    a = np.array([s.z * s.amount for s in species])
    b = np.array([-s.z for s in species])
    return _exp_terms_nonlinearity(a, b, 0.0, "classical", species)


def make_f0(species: Sequence[IonSpecies], volume: float, phi0_star: float) -> Nonlinearity:
    """Limiting conserved-charge density with reference exactly phi0_star."""
    if not volume > 0:
        raise ConfigError("volume must be positive")
    check_neutrality(species)
    a = np.array([s.amount * s.z / volume for s in species])
    b = np.array([-s.z for s in species])
    return _exp_terms_nonlinearity(
        a, b, phi0_star, "f0", species, phi_star=float(phi0_star),
        meta={"volume": float(volume)},
    )


def make_fhat1(
    species: Sequence[IonSpecies],
    volume: float,
    phi0_star: float,
    mhat: Sequence[float],
) -> Nonlinearity:
    """First-order mass-correction density; mhat_i are signed, no contracts."""
    if not volume > 0:
        raise ConfigError("volume must be positive")
    if len(mhat) != len(species):
        raise ConfigError("mhat must have one entry per species")
    a = np.array([mh * s.z / volume for mh, s in zip(mhat, species)])
    b = np.array([-s.z for s in species])
    if not np.any(a):
        def zero(phi):
            return 0.0 if np.isscalar(phi) else np.zeros_like(np.asarray(phi, dtype=float))

        zero.from_delta = lambda d: np.zeros_like(np.atleast_1d(np.asarray(d, dtype=float)))
        return Nonlinearity(
            f=zero, df=zero, F=zero, phi_star=float(phi0_star),
            provenance="fhat1", species=tuple(species),
            meta={"volume": float(volume), "mhat": tuple(float(m) for m in mhat)},
        )
    esum = _ExpSum(a, b, phi0_star)
    return Nonlinearity(
        f=esum.with_anchor(phi0_star),
        df=esum.derivative(),
        F=_ExpSumAntiderivative(esum, phi0_star),
        phi_star=float(phi0_star),
        provenance="fhat1",
        species=tuple(species),
        meta={"volume": float(volume), "mhat": tuple(float(m) for m in mhat)},
    )


def make_f1(f0: Nonlinearity, fhat1: Nonlinearity, q: float) -> Nonlinearity:
    """Combined first-order density f1 = -q f0' + fhat1."""
    if f0.provenance != "f0" or fhat1.provenance != "fhat1":
        raise UnsupportedProvenance("make_f1 needs an f0 and an fhat1")
    if f0.phi_star is None or abs(f0.phi_star - fhat1.phi_star) > 1e-12:
        raise MismatchedReference("f0 and fhat1 must share the reference potential")
    d2f0 = f0.df.derivative()
    anchor = float(f0.phi_star)

    def f1(phi):
        return -q * f0.df(phi) + fhat1.f(phi)

    def df1(phi):
        return -q * d2f0(phi) + fhat1.df(phi)

    def F1(phi):
        # f0(phi0*) = 0, so the antiderivative of -q f0' anchored there is -q f0
        return -q * f0.f(phi) + fhat1.F(phi)

    # delta-native paths keep relative accuracy at exponentially small
    # layer offsets (f0' has sign-definite terms, so its argument may be
    # reconstructed from the rounded potential without loss)
    f1.from_delta = lambda d: -q * np.atleast_1d(
        np.asarray(f0.df(anchor + np.asarray(d, dtype=float)), dtype=float)
    ) + fhat1.f.from_delta(d)
    F1.from_delta = lambda d: -q * f0.f.from_delta(d) + fhat1.F.from_delta(d)

    return Nonlinearity(
        f=f1, df=df1, F=F1, phi_star=f0.phi_star, provenance="f1",
        species=f0.species, meta={"q": float(q)},
    )


def make_custom(f, df, F, phi_star=None, monotone=True) -> Nonlinearity:
    """Wrap user-supplied evaluators (monotone custom densities only)."""
    if not monotone:
        raise UnsupportedProvenance("custom nonlinearities must be monotone")
    return Nonlinearity(f=f, df=df, F=F, phi_star=phi_star, provenance="custom")


def _find_zero_expsum(esum: _ExpSum) -> float:
    return find_reference_potential(
        Nonlinearity(f=esum, df=esum.derivative(), F=lambda p: 0.0,
                     phi_star=None, provenance="custom")
    )


def find_reference_potential(nl: Nonlinearity, rtol: float = 1e-13) -> float:
    """Unique zero of a strictly decreasing f, by bracket expansion + bisection.

    The bracket grows geometrically from [-1, 1] around 0; after bisection to
    width `rtol`, up to three Newton steps polish the root.
    """
    if nl.provenance in ("fhat1", "f1"):
        raise UnsupportedProvenance(
            f"provenance {nl.provenance!r} has no reference-potential contract"
        )
    f = nl.f
    lo, hi = -1.0, 1.0
    for _ in range(64):
        flo, fhi = f(lo), f(hi)
        if flo > 0.0 > fhi:
            break
        # an exactly-zero endpoint is a root only at moderate arguments;
        # far out it is indistinguishable from exponential underflow
        if flo == 0.0 and abs(lo) <= 64.0:
            return float(lo)
        if fhi == 0.0 and abs(hi) <= 64.0:
            return float(hi)
        if flo <= 0.0:  # f decreasing: zero lies left of lo
            lo *= 2.0
        if fhi >= 0.0:
            hi *= 2.0
    else:
        raise NoSignChange("could not bracket the reference potential")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * max(1.0, abs(mid)):
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    for _ in range(3):
        slope = nl.df(root)
        if not np.isfinite(slope) or slope == 0.0:
            break
        step = f(root) / slope
        if not np.isfinite(step):
            break
        cand = root - step
        if abs(f(cand)) >= abs(f(root)):
            break
        root = cand
    return float(root)


def decay_rate(nl: Nonlinearity, interval: tuple[float, float], samples: int = 2048) -> float:
    """m_f = sqrt(-max f') over [lo, hi], by dense sampling plus golden-section
    refinement of the best bracket."""
    lo, hi = float(interval[0]), float(interval[1])
    if lo > hi:
        raise ConfigError("interval must satisfy lo <= hi")
    if lo == hi:
        slope = float(nl.df(lo))
        if slope >= 0:
            raise NonDecreasingDetected(f"f'({lo}) = {slope:.3e} >= 0")
        return math.sqrt(-slope)
    phi = np.linspace(lo, hi, samples)
    dvals = np.asarray(nl.df(phi), dtype=float)
    if np.any(dvals >= 0):
        bad = phi[int(np.argmax(dvals))]
        raise NonDecreasingDetected(f"f'({bad:.6g}) >= 0 inside the interval")
    j = int(np.argmax(dvals))
    a = phi[max(j - 1, 0)]
    b = phi[min(j + 1, samples - 1)]
    # golden-section maximization of f' on [a, b]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = float(nl.df(c)), float(nl.df(d))
    while b - a > 1e-13 * max(1.0, abs(a) + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(nl.df(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(nl.df(d))
    best = max(float(np.max(dvals)), fc, fd)
    if best >= 0:
        raise NonDecreasingDetected("max f' >= 0 after refinement")
    return math.sqrt(-best)


def symmetric_salt(concentration: float = 1.0, role: str = "bulk") -> list[IonSpecies]:
    """1:1 salt helper: z = +-1, equal amounts."""
    return [IonSpecies(1.0, concentration, role), IonSpecies(-1.0, concentration, role)]
