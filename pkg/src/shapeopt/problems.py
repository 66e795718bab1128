"""Optimization problems: analytic test, axisymmetric drag, airfoil.

Each problem owns its bounds, its seeding range, its penalty score, and a
one-line objective description used in proposer prompts.  evaluate()
returns the score to maximize; designs whose geometry cannot be scored
raise EvaluationFailed so the loop records the penalty instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import airfoil as af
from .axisym import (
    BodyProfile,
    GeometricConstraint,
    InvalidBodyError,
    integrate_profile,
    rescale_to_constraint,
)
from .evolution import Bounds, EvaluationFailed, EvaluatorFatal
from .stokesbem import (
    DragResult,
    MeshError,
    profile_to_mesh,
    solve_drag,
    solve_tractions,
)

COEFF_BOUND = math.pi  # tangent-angle coefficients beyond |pi| fold the meridian
AXISYM_PENALTY = -1.0e3
_MIN_RADIUS_TOL = -1.0e-8

__all__ = [
    "AXISYM_PENALTY",
    "AirfoilProblem",
    "AxisymDragProblem",
    "COEFF_BOUND",
    "QuadraticProblem",
]


@dataclass
class QuadraticProblem:
    """Analytic test objective: negative squared distance to a target point."""

    dimension: int = 3
    target: np.ndarray | None = None
    penalty_score: float = -1.0e3

    def __post_init__(self) -> None:
        self.bounds = Bounds.uniform(self.dimension, -1.0, 1.0)
        if self.target is None:
            self.target = np.full(self.dimension, 0.3)
        self.target = np.asarray(self.target, dtype=float)
        if self.target.shape != (self.dimension,):
            raise ValueError("target has the wrong dimension")
        self.objective = (
            "maximize the score -|x - c|^2, the negative squared distance"
            " to a hidden target point; the maximum score is 0"
        )

    def evaluate(self, x: np.ndarray) -> float:
        delta = np.asarray(x, dtype=float) - self.target
        return -float(delta @ delta)


@dataclass
class AxisymDragProblem:
    """Minimum-drag body of revolution at fixed volume or surface area.

    Designs are the odd-mode coefficients of the meridian tangent angle;
    the score is the negative drag normalized by the equal-measure sphere,
    so the sphere scores -1 and better bodies score above it.
    """

    n_modes: int = 2
    constraint: GeometricConstraint = field(
        default_factory=GeometricConstraint.fixed_volume
    )
    n_samples: int = 801
    n_elements: int = 120
    penalty_score: float = AXISYM_PENALTY

    def __post_init__(self) -> None:
        if not 1 <= self.n_modes <= 8:
            raise ValueError("n_modes must lie in [1, 8]")
        self.bounds = Bounds.uniform(self.n_modes, -COEFF_BOUND, COEFF_BOUND)
        # Case-specific seeding: positive leading coefficients integrate to
        # negative radii (inside-out bodies), so initial means center on the
        # sphere's A_1 = -pi/2 with moderate higher modes.
        quarter = 0.25 * math.pi
        lower = np.full(self.n_modes, -quarter)
        upper = np.full(self.n_modes, quarter)
        lower[0] -= 0.5 * math.pi
        upper[0] -= 0.5 * math.pi
        self.init_range = Bounds(lower, upper)
        label = (
            "volume" if self.constraint.kind == "fixed_volume" else "surface area"
        )
        self.objective = (
            "maximize the negative normalized drag of an axisymmetric body in"
            f" slow viscous flow at fixed {label}; the equal-{label} sphere"
            " scores -1, and lower-drag shapes score closer to 0"
        )

    def _constrained_profile(self, x: np.ndarray) -> BodyProfile:
        profile = integrate_profile(np.asarray(x, dtype=float), self.n_samples)
        if profile.min_interior_radius < _MIN_RADIUS_TOL:
            raise EvaluationFailed("meridian crosses the axis (negative radius)")
        try:
            return rescale_to_constraint(profile, self.constraint)
        except InvalidBodyError as exc:
            raise EvaluationFailed(str(exc)) from exc

    def evaluate_detail(self, x: np.ndarray) -> tuple[float, BodyProfile, DragResult]:
        """Score plus the constrained profile and full drag result."""
        profile = self._constrained_profile(x)
        try:
            mesh = profile_to_mesh(profile, self.n_elements)
            result = solve_drag(mesh)
        except (MeshError, np.linalg.LinAlgError) as exc:
            raise EvaluationFailed(str(exc)) from exc
        if not np.isfinite(result.normalized) or result.normalized <= 0.0:
            raise EvaluationFailed("drag solve returned a non-physical value")
        return -result.normalized, profile, result

    def evaluate(self, x: np.ndarray) -> float:
        score, _, _ = self.evaluate_detail(x)
        return score

    def traction_profile(self, x: np.ndarray):
        """Mesh and solved tractions (q_r, q_z) for diagnostics exports."""
        profile = self._constrained_profile(x)
        mesh = profile_to_mesh(profile, self.n_elements)
        return mesh, solve_tractions(mesh)


@dataclass
class AirfoilProblem:
    """Lift-to-drag shaping of a closed Bézier profile via an external solver.

    The design vector concatenates the (p, q, m) triples of the free
    control points; the remaining points sit at their sector centers.
    Entangled profiles and failed evaluations score the fixed penalty.
    """

    n_free_points: int = 3
    free_indices: tuple[int, ...] | None = None
    evaluator: af.EvaluatorConfig | None = None
    samples_per_segment: int = 32
    handle_fraction: float = 0.3
    penalty_score: float = af.FAILURE_REWARD

    def __post_init__(self) -> None:
        if not 1 <= self.n_free_points <= af.N_CONTROL_POINTS:
            raise ValueError("n_free_points must lie in [1, 4]")
        if self.free_indices is None:
            self.free_indices = tuple(range(self.n_free_points))
        self.free_indices = tuple(int(i) for i in self.free_indices)
        if len(self.free_indices) != self.n_free_points or len(
            set(self.free_indices)
        ) != self.n_free_points:
            raise ValueError("free_indices must be distinct and match n_free_points")
        if any(i not in range(af.N_CONTROL_POINTS) for i in self.free_indices):
            raise ValueError("free_indices out of range")
        self.bounds = Bounds.uniform(3 * self.n_free_points, -1.0, 1.0)
        self.objective = (
            "maximize the shaped reward of the time-averaged lift-to-drag"
            " ratio of a closed airfoil profile relative to a reference body"
        )

    def control_points(self, x: np.ndarray) -> list[af.PolarControlPoint]:
        x = np.asarray(x, dtype=float)
        if x.shape != (3 * self.n_free_points,):
            raise ValueError("design has the wrong dimension")
        points = []
        for i in range(af.N_CONTROL_POINTS):
            if i in self.free_indices:
                k = 3 * self.free_indices.index(i)
                p, q, m = x[k], x[k + 1], x[k + 2]
            else:
                p, q, m = 0.0, 0.0, 0.0  # fixed points sit at sector centers
            points.append(af.params_to_polar(p, q, m, i))
        return points

    def curve(self, x: np.ndarray) -> af.AirfoilCurve:
        try:
            curve = af.build_airfoil_curve(
                self.control_points(x),
                self.samples_per_segment,
                self.handle_fraction,
            )
        except ValueError as exc:
            raise EvaluationFailed(str(exc)) from exc
        if not af.is_simple(curve):
            raise EvaluationFailed("profile is entangled (self-intersecting)")
        return curve

    def evaluate(self, x: np.ndarray) -> float:
        if self.evaluator is None or not self.evaluator.command:
            raise EvaluatorFatal("no flow evaluator configured")
        curve = self.curve(x)
        perf = af.external_evaluate(curve, self.evaluator)
        if perf.status != af.STATUS_OK:
            raise EvaluationFailed("flow evaluation failed")
        return af.shaped_reward(
            af.relative_ratio(perf, self.evaluator.baseline_ratio)
        )
