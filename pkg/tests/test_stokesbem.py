"""Boundary-element drag solver against analytic and quadrature oracles."""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ellipe, ellipk

from shapeopt.axisym import GeometricConstraint, integrate_profile, rescale_to_constraint
from shapeopt.stokesbem import (
    MAX_ELEMENTS,
    SPHERE_DRAG,
    MeshError,
    assemble_single_layer,
    complete_elliptic_e,
    complete_elliptic_k,
    export_traction_csv,
    mesh_from_meridian,
    profile_to_mesh,
    ring_stokeslet,
    solve_drag,
    solve_tractions,
)

SPHERE = np.array([-math.pi / 2])


def sphere_mesh(n_elements, radius=1.0):
    theta = np.linspace(0.0, math.pi, 2001)
    r = radius * np.sin(theta)
    z = -radius * np.cos(theta)
    return mesh_from_meridian(r, z, radius * theta, n_elements)


# ---------------------------------------------------------------- elliptic

def test_elliptic_special_values():
    assert complete_elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert complete_elliptic_e(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert complete_elliptic_e(1.0) == 1.0


def test_elliptic_against_scipy():
    m = np.concatenate(
        [np.linspace(0.0, 0.999, 200), [0.5, 0.9999, 0.999999]]
    )
    assert np.max(np.abs(complete_elliptic_k(m) - ellipk(m))) < 1e-12
    assert np.max(np.abs(complete_elliptic_e(m) - ellipe(m))) < 1e-12


def test_elliptic_frozen_midpoint():
    # AGM oracle value of K(0.5), computed independently before the build
    assert complete_elliptic_k(0.5) == pytest.approx(1.8540746773013719, abs=1e-14)


def test_elliptic_domain_errors():
    with pytest.raises(ValueError):
        complete_elliptic_k(1.0)
    with pytest.raises(ValueError):
        complete_elliptic_k(-0.1)
    with pytest.raises(ValueError):
        complete_elliptic_e(1.0 + 1e-12)


# ------------------------------------------------------------------ kernel

def oracle_kernel(r, z, r0, z0):
    """Direct azimuthal quadrature of the free-space Stokeslet over the ring."""

    def component(f):
        val, _ = quad(f, 0.0, 2.0 * math.pi, limit=400, epsabs=1e-13, epsrel=1e-13)
        return val

    def parts(phi):
        dx = r - r0 * math.cos(phi)
        dy = -r0 * math.sin(phi)
        dz = z - z0
        dist = math.sqrt(dx * dx + dy * dy + dz * dz)
        # project the source ring direction onto the field point's (r, z) frame
        return dx, dy, dz, dist

    def f_rr(phi):
        dx, dy, dz, dist = parts(phi)
        dr_field = dx  # radial component at the field azimuth 0
        dr_source = dx * math.cos(phi) + dy * math.sin(phi)
        return math.cos(phi) / dist + dr_field * dr_source / dist**3

    def f_rz(phi):
        dx, dy, dz, dist = parts(phi)
        return dx * dz / dist**3

    def f_zr(phi):
        dx, dy, dz, dist = parts(phi)
        dr_source = dx * math.cos(phi) + dy * math.sin(phi)
        return dz * dr_source / dist**3

    def f_zz(phi):
        dx, dy, dz, dist = parts(phi)
        return 1.0 / dist + dz * dz / dist**3

    return (
        component(f_rr),
        component(f_rz),
        component(f_zr),
        component(f_zz),
    )


def test_kernel_matches_azimuthal_quadrature():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(25):
        r, r0 = rng.uniform(0.2, 2.0, 2)
        z, z0 = rng.uniform(-1.5, 1.5, 2)
        if abs(z - z0) < 0.05 and abs(r - r0) < 0.05:
            z0 += 0.2
        got = ring_stokeslet(r, z, r0, z0)
        want = oracle_kernel(r, z, r0, z0)
        worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
    assert worst < 5e-9  # oracle quadrature accuracy bound


def test_kernel_small_m_branch_continuity():
    # same geometry evaluated just either side of the branch switch
    r0, z0 = 1.0, 0.0
    for m_target in (0.049, 0.051):
        # choose a field radius giving the target modulus at fixed dz
        dz = 2.0
        # m = 4 r r0 / ((r+r0)^2 + dz^2); solve for r by iteration
        r = 0.5
        for _ in range(60):
            r = m_target * ((r + r0) ** 2 + dz**2) / (4 * r0)
        got = ring_stokeslet(r, z0 + dz, r0, z0)
        want = oracle_kernel(r, z0 + dz, r0, z0)
        assert max(abs(g - w) for g, w in zip(got, want)) < 1e-10


def test_kernel_exchange_symmetry():
    rng = np.random.default_rng(9)
    for _ in range(50):
        r, r0 = rng.uniform(0.1, 2.5, 2)
        z, z0 = rng.uniform(-2.0, 2.0, 2)
        if abs(z - z0) + abs(r - r0) < 0.02:
            continue
        m_rr, m_rz, m_zr, m_zz = ring_stokeslet(r, z, r0, z0)
        s_rr, s_rz, s_zr, s_zz = ring_stokeslet(r0, z0, r, z)
        assert m_rr == pytest.approx(s_rr, rel=1e-12, abs=1e-12)
        assert m_zz == pytest.approx(s_zz, rel=1e-12, abs=1e-12)
        assert m_rz == pytest.approx(s_zr, rel=1e-12, abs=1e-12)
        assert m_zr == pytest.approx(s_rz, rel=1e-12, abs=1e-12)


def test_kernel_far_field_decay():
    # doubling an axial separation roughly halves the dominant components
    near = ring_stokeslet(1.0, 10.0, 1.0, 0.0)
    far = ring_stokeslet(1.0, 20.0, 1.0, 0.0)
    assert near[3] / far[3] == pytest.approx(2.0, rel=0.06)


def test_kernel_log_singularity_slope():
    # approach along the meridian: kernel ~ -2 ln(distance) + bounded
    r0, z0 = 1.0, 0.3
    eps = np.array([1e-3, 1e-4, 1e-5])
    zz = np.array([ring_stokeslet(r0, z0 + e, r0, z0)[3] for e in eps])
    slopes = np.diff(zz) / np.diff(np.log(eps))
    assert np.allclose(slopes, -2.0, rtol=0.01)


def test_kernel_rejects_bad_points():
    with pytest.raises(ValueError):
        ring_stokeslet(0.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ring_stokeslet(1.0, 0.0, 1.0, 0.0)  # coincident


# -------------------------------------------------------------------- mesh

def test_sphere_mesh_arclength():
    mesh = sphere_mesh(100)
    assert mesh.total_arclength == pytest.approx(math.pi, rel=1e-6)
    assert mesh.widths.sum() == pytest.approx(math.pi, rel=1e-8)
    assert mesh.n_elements == 100
    assert np.all(mesh.midpoint_r > 0)


def test_single_element_mesh():
    mesh = sphere_mesh(1)
    assert mesh.n_elements == 1
    assert mesh.widths[0] == pytest.approx(math.pi, rel=1e-6)


def test_element_size_halves():
    coarse = sphere_mesh(50)
    fine = sphere_mesh(100)
    assert fine.widths.max() == pytest.approx(coarse.widths.max() / 2, rel=0.1)


def test_mesh_validation():
    theta = np.linspace(0.0, math.pi, 101)
    r, z, arc = np.sin(theta), -np.cos(theta), theta
    with pytest.raises(MeshError):
        mesh_from_meridian(r, z, arc, 0)
    with pytest.raises(MeshError):
        mesh_from_meridian(r, z, arc, MAX_ELEMENTS + 1)
    with pytest.raises(MeshError):
        mesh_from_meridian(-r, z, arc, 10)  # negative radius
    with pytest.raises(MeshError):
        mesh_from_meridian(r[:4], z[:4], arc[:4], 2)  # too few samples


def test_profile_to_mesh_arclength():
    profile = rescale_to_constraint(
        integrate_profile(SPHERE, 801), GeometricConstraint.fixed_volume()
    )
    mesh = profile_to_mesh(profile, 100)
    # meridian length of the unit sphere is pi
    assert mesh.total_arclength == pytest.approx(math.pi, rel=1e-6)


# ------------------------------------------------------------------- solve

def test_matrix_finite_and_reciprocal():
    # off-diagonal blocks inherit the kernel exchange symmetry once the
    # ring-radius-times-width measures are divided out; the residual is the
    # midpoint-vs-element quadrature error, which shrinks as O(w^2)
    def reciprocity_residual(n):
        mesh = sphere_mesh(n)
        matrix = assemble_single_layer(mesh)
        assert np.all(np.isfinite(matrix))
        i, j = n // 6, (2 * n) // 3
        block = matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
        swapped = matrix[2 * j : 2 * j + 2, 2 * i : 2 * i + 2]
        mi = mesh.midpoint_r[i] * mesh.widths[i]
        mj = mesh.midpoint_r[j] * mesh.widths[j]
        return np.max(np.abs(block * mi - swapped.T * mj)) / np.max(
            np.abs(block * mi)
        )

    coarse = reciprocity_residual(48)
    fine = reciprocity_residual(192)
    assert coarse < 2e-2
    assert fine < coarse / 8  # second-order shrinkage


def test_matrix_shape():
    matrix = assemble_single_layer(sphere_mesh(16))
    assert matrix.shape == (32, 32)
    assert np.all(np.isfinite(matrix))


def test_sphere_drag_convergence():
    # frozen self-convergence table; Stokes law gives exactly 6 pi
    expected = {25: 1.00065828, 50: 1.00016451, 100: 1.00004112}
    drs = {}
    for n, value in expected.items():
        result = solve_drag(sphere_mesh(n))
        drs[n] = result.normalized
        assert result.normalized == pytest.approx(value, abs=2e-6)
        assert result.drag == pytest.approx(SPHERE_DRAG * result.normalized, rel=1e-12)
    errors = [abs(drs[n] - 1.0) for n in (25, 50, 100)]
    assert errors[0] > errors[1] > errors[2]


def test_sphere_traction_is_uniform():
    # the translating sphere carries the constant traction q_z = 3/2
    mesh = sphere_mesh(100)
    q_r, q_z = solve_tractions(mesh)
    assert np.max(np.abs(q_z - 1.5)) < 2e-3
    assert np.max(np.abs(q_r)) < 2e-3


def test_quadrature_order_self_convergence():
    mesh = sphere_mesh(64)
    d8 = solve_drag(mesh, quad_order=8).normalized
    d16 = solve_drag(mesh, quad_order=16).normalized
    assert abs(d8 - d16) / d16 < 5e-4


def test_drag_scale_linearity():
    d1 = solve_drag(sphere_mesh(64, radius=1.0)).drag
    d2 = solve_drag(sphere_mesh(64, radius=2.0)).drag
    d3 = solve_drag(sphere_mesh(64, radius=3.0)).drag
    assert d2 / d1 == pytest.approx(2.0, rel=1e-9)
    assert d3 / d1 == pytest.approx(3.0, rel=1e-9)


def test_drag_positive_for_random_valid_bodies():
    rng = np.random.default_rng(31)
    found = 0
    while found < 5:
        coeffs = rng.uniform([-2.5, -0.5], [-0.5, 0.5])
        profile = integrate_profile(coeffs, 401)
        if profile.min_interior_radius < -1e-8:
            continue
        scaled = rescale_to_constraint(profile, GeometricConstraint.fixed_volume())
        result = solve_drag(profile_to_mesh(scaled, 60))
        assert np.isfinite(result.normalized) and result.drag > 0
        found += 1


def test_mesh_convergence_is_monotone():
    errors = []
    for n in (50, 100, 200):
        errors.append(
            abs(
                solve_drag(sphere_mesh(n)).normalized
                - solve_drag(sphere_mesh(2 * n)).normalized
            )
        )
    assert errors[0] > errors[1] > errors[2]


def test_export_traction_csv(tmp_path):
    mesh = sphere_mesh(20)
    q_r, q_z = solve_tractions(mesh)
    path = tmp_path / "traction.csv"
    export_traction_csv(mesh, q_r, q_z, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "s,f_r,f_z"
    assert len(rows) == 21
    s_values = np.array([float(row.split(",")[0]) for row in rows[1:]])
    assert -1.0 < s_values[0] < s_values[-1] < 1.0
