"""Axisymmetric meridian curves built from a tangent-angle series.

A body of revolution is described by the tangent angle ``phi(s)`` of its
meridian, expanded in odd-degree Legendre polynomials of the normalized
arclength ``s`` in ``[-1, 1]``.  Restricting the series to odd degrees
closes the meridian onto the axis of revolution at both ends and makes the
body fore-aft symmetric.  A uniform scale factor ``lam`` stretches the
curve until the revolved body meets a prescribed volume or surface area;
the targets below make the reference sphere come out with radius one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

VOLUME_TARGET = 4.0 * np.pi / 3.0
AREA_TARGET = 4.0 * np.pi

FIXED_VOLUME = "fixed_volume"
FIXED_AREA = "fixed_area"

# Below this the constrained measure is treated as degenerate.
_MEASURE_FLOOR = 1e-12

__all__ = [
    "AREA_TARGET",
    "BodyProfile",
    "FIXED_AREA",
    "FIXED_VOLUME",
    "GeometricConstraint",
    "InvalidBodyError",
    "VOLUME_TARGET",
    "compute_area",
    "compute_volume",
    "cumulative_simpson_uniform",
    "export_profile_csv",
    "integrate_profile",
    "rescale_to_constraint",
    "simpson_uniform",
    "tangent_angle",
]


class InvalidBodyError(ValueError):
    """The profile has no usable measure under its geometric constraint."""


@dataclass(frozen=True)
class GeometricConstraint:
    """Fixed-volume or fixed-area normalization applied to a profile."""

    kind: str
    target: float

    def __post_init__(self) -> None:
        if self.kind not in (FIXED_VOLUME, FIXED_AREA):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if not self.target > 0.0:
            raise ValueError("constraint target must be positive")

    @classmethod
    def fixed_volume(cls, target: float = VOLUME_TARGET) -> "GeometricConstraint":
        return cls(FIXED_VOLUME, float(target))

    @classmethod
    def fixed_area(cls, target: float = AREA_TARGET) -> "GeometricConstraint":
        return cls(FIXED_AREA, float(target))


@dataclass
class BodyProfile:
    """Sampled meridian of a body of revolution.

    ``r`` and ``z`` carry the scale factor ``lam``, so the physical
    arclength along the meridian is ``lam * (s + 1)`` and the tangent of
    the sampled curve is ``lam * (sin(phi), cos(phi))``.
    """

    s: np.ndarray
    phi: np.ndarray
    r: np.ndarray
    z: np.ndarray
    lam: float = 1.0

    @property
    def n_samples(self) -> int:
        return self.s.size

    @property
    def closure_residual(self) -> float:
        """How far the meridian misses the axis at its far end."""
        return abs(float(self.r[-1]))

    @property
    def min_interior_radius(self) -> float:
        return float(np.min(self.r[1:-1]))

    def with_scale(self, lam: float) -> "BodyProfile":
        """Same shape at a different uniform scale."""
        lam = float(lam)
        if not lam > 0.0:
            raise ValueError("scale factor must be positive")
        factor = lam / self.lam
        return replace(self, r=self.r * factor, z=self.z * factor, lam=lam)


def tangent_angle(coeffs, s):
    """Tangent angle ``phi(s) = sum_k A_k P_{2k-1}(s)``.

    The odd-degree Legendre polynomials are evaluated with the three-term
    recurrence, which is stable on ``[-1, 1]``.  ``s`` may be a scalar or
    an array.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D vector")
    s_arr = np.asarray(s, dtype=float)
    p_prev = np.ones_like(s_arr)  # P_0
    p_cur = s_arr.copy()  # P_1
    total = coeffs[0] * p_cur
    for degree in range(2, 2 * coeffs.size):
        p_next = ((2 * degree - 1) * s_arr * p_cur - (degree - 1) * p_prev) / degree
        p_prev, p_cur = p_cur, p_next
        if degree % 2 == 1:
            total = total + coeffs[(degree - 1) // 2] * p_cur
    if s_arr.ndim == 0:
        return float(total)
    return total


def cumulative_simpson_uniform(y, dx: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled ``y``.

    Composite Simpson at even sample indices; odd indices use the
    three-point one-sided rule so the result is defined at every sample.
    Requires an odd number of samples (an even number of intervals).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 3 or y.size % 2 == 0:
        raise ValueError("need a 1-D array with an odd number of samples (>= 3)")
    out = np.empty_like(y)
    out[0] = 0.0
    blocks = dx / 3.0 * (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
    out[2::2] = np.cumsum(blocks)
    out[1::2] = out[0:-2:2] + dx / 12.0 * (5.0 * y[0:-2:2] + 8.0 * y[1::2] - y[2::2])
    return out


def simpson_uniform(y, dx: float) -> float:
    """Composite Simpson integral of uniformly sampled ``y`` (odd length)."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 3 or y.size % 2 == 0:
        raise ValueError("need a 1-D array with an odd number of samples (>= 3)")
    return float(dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


def _sample_grid(n_samples: int) -> np.ndarray:
    # Constructed so s[i] == -s[n-1-i] exactly; parity of the integrands
    # then closes the meridian to round-off instead of quadrature error.
    half = (n_samples - 1) // 2
    return (np.arange(n_samples) - half) / half


def integrate_profile(coeffs, n_samples: int = 801) -> BodyProfile:
    """Meridian ``(r, z)`` at unit scale by cumulative quadrature of ``phi``."""
    if n_samples % 2 == 0 or n_samples < 201:
        raise ValueError("n_samples must be odd and at least 201")
    s = _sample_grid(n_samples)
    phi = tangent_angle(coeffs, s)
    ds = 2.0 / (n_samples - 1)
    r = cumulative_simpson_uniform(np.sin(phi), ds)
    z = cumulative_simpson_uniform(np.cos(phi), ds)
    return BodyProfile(s=s, phi=phi, r=r, z=z, lam=1.0)


def compute_volume(profile: BodyProfile) -> float:
    """Volume of the revolved body, |pi * integral of r^2 dz|."""
    ds = profile.s[1] - profile.s[0]
    integrand = profile.r ** 2 * np.cos(profile.phi)
    return abs(np.pi * profile.lam * simpson_uniform(integrand, ds))


def compute_area(profile: BodyProfile) -> float:
    """Lateral surface area of the revolved body, |2 pi * integral of r dl|."""
    ds = profile.s[1] - profile.s[0]
    return abs(2.0 * np.pi * profile.lam * simpson_uniform(profile.r, ds))


def rescale_to_constraint(
    profile: BodyProfile, constraint: GeometricConstraint
) -> BodyProfile:
    """Uniformly rescale so the revolved body meets the constraint target.

    Volume scales with the cube of the factor and area with its square, so
    the returned profile satisfies the target exactly up to round-off.  A
    profile whose measure is (numerically) zero cannot be rescaled and
    raises :class:`InvalidBodyError`.
    """
    if constraint.kind == FIXED_VOLUME:
        measure = compute_volume(profile)
        exponent = 1.0 / 3.0
    else:
        measure = compute_area(profile)
        exponent = 0.5
    if not measure > _MEASURE_FLOOR:
        raise InvalidBodyError(f"degenerate body: measure {measure:.3e}")
    factor = (constraint.target / measure) ** exponent
    return profile.with_scale(profile.lam * factor)


def export_profile_csv(profile: BodyProfile, path) -> None:
    """Write the sampled meridian as CSV columns (s, r, z, phi)."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["s", "r", "z", "phi"])
        for row in zip(profile.s, profile.r, profile.z, profile.phi):
            writer.writerow([f"{value:.12g}" for value in row])
