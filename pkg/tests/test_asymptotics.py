import math

import numpy as np
import pytest

from qhahn.asymptotics import (
    CircleC,
    CircleD,
    ExponentFunctions,
    LogqImageOfC,
    VContour,
    g_helper,
    g_scaled,
    identity_checks,
    lemma_checks,
    steep_descent_check,
    taylor_check,
)
from qhahn.errors import BranchError, DomainError
from qhahn.scaling import ModelParams, coefficients


@pytest.fixture(scope="module")
def ef(fig_coeffs, fig_params):
    return ExponentFunctions(fig_coeffs, fig_params, c=0.7, x=0.3)


class TestContours:
    def test_circle_c_landmarks(self):
        c = CircleC(q=0.2, theta=0.4)
        assert c.points(0.0) == pytest.approx(0.2**0.4)
        assert c.points(math.pi) == pytest.approx(2.0 - 0.2**0.4)

    def test_circle_d_radius(self):
        d = CircleD(q=0.2, theta=0.4)
        ts = np.linspace(-3, 3, 7)
        assert np.allclose(np.abs(d.points(ts)), 0.2**0.4)

    def test_logq_image_smooth(self):
        c = LogqImageOfC(q=0.2, theta=0.4)
        s = np.linspace(-math.pi, math.pi, 201)
        pts = c.points(s)
        assert pts[len(s) // 2] == pytest.approx(0.4)
        assert np.max(np.abs(np.diff(pts))) < 0.2

    def test_v_contour(self):
        v = VContour(tip=0.4, phi=math.pi / 3, delta=2.0)
        assert v.points(0.0) == pytest.approx(0.4)
        up = v.points(1.0)
        dn = v.points(-1.0)
        assert up == pytest.approx(0.4 + np.exp(1j * math.pi / 3))
        assert dn == pytest.approx(np.conj(up))
        # finite-difference tangent matches
        h = 1e-7
        fd = (v.points(1.0 + h) - v.points(1.0 - h)) / (2 * h)
        assert fd == pytest.approx(v.tangents(1.0))


class TestExponentFunctions:
    def test_f0_real_on_unit_interval(self, ef):
        zs = np.linspace(0.05, 0.95, 12)
        vals = ef.f0(zs.astype(complex))
        assert np.max(np.abs(vals.imag)) < 1e-14
        assert np.allclose(vals.real, ef.f0_real(zs))

    def test_conjugate_symmetry(self, ef, rng):
        for _ in range(100):
            z = complex(rng.uniform(0.1, 1.2), rng.uniform(-0.8, 0.8))
            if z.imag == 0.0:
                continue
            assert ef.f0(np.array([np.conj(z)]))[0] == pytest.approx(
                np.conj(ef.f0(np.array([z]))[0]), rel=1e-12
            )

    def test_branch_guard(self, ef):
        with pytest.raises(BranchError):
            ef.f0(np.array([-0.5 + 0.0j]))
        with pytest.raises(BranchError):
            ef.f0(np.array([9.0 + 0.0001j]))

    def test_f1_vanishes_at_c_zero(self, fig_coeffs, fig_params):
        ef0 = ExponentFunctions(fig_coeffs, fig_params, c=0.0, x=0.5)
        zs = np.array([0.3 + 0.1j, 0.6 - 0.2j])
        assert np.max(np.abs(ef0.f1(zs))) == 0.0

    def test_f2_linear_in_logq_z(self, ef):
        z = 0.37
        expected = ef.beta_x * math.log(z) / math.log(0.2)
        assert ef.f2(np.array([z + 0j]))[0] == pytest.approx(expected, rel=1e-14)


class TestTaylor:
    def test_critical_point_structure(self, ef, fig_coeffs):
        tc = taylor_check(ef)
        chi2 = 2.0 * fig_coeffs.chi
        assert abs(tc["f0_d1"]) < 1e-6 * chi2
        assert abs(tc["f0_d2"]) < 1e-6 * chi2
        assert tc["f0_d3_residual"] < 1e-6
        assert abs(tc["f1_d1"]) < 1e-8
        assert tc["f1_d2_residual"] < 1e-6

    def test_f2_exactly_linear(self, ef):
        tc = taylor_check(ef)
        assert tc["f2_d1_residual"] < 1e-12
        assert abs(tc["f2_d2"]) < 1e-9

    def test_f1_zero_at_c_zero(self, fig_coeffs, fig_params):
        ef0 = ExponentFunctions(fig_coeffs, fig_params, c=0.0)
        tc = taylor_check(ef0)
        assert tc["f1_d2_residual"] < 1e-12  # absolute: target is 0


class TestSteepDescent:
    def test_fig_point_monotone(self, ef):
        for contour in ("C", "D"):
            prof = steep_descent_check(ef, contour, 10_000)
            assert prof.monotone
            assert prof.max_at_zero

    def test_profile_symmetry(self, ef):
        prof = steep_descent_check(ef, "C", 2048)
        vals = prof.values
        assert np.allclose(vals, vals[::-1], atol=1e-11)

    def test_invalid_parameters_no_exception(self):
        # violating the technical condition may break monotonicity but must
        # return a diagnostic, not raise
        p = ModelParams(q=0.2, mu=0.9, nu=0.3)
        co = coefficients(p, 0.4)
        ef_bad = ExponentFunctions(co, p)
        prof = steep_descent_check(ef_bad, "C", 2048)
        assert prof.monotone in (True, False)

    def test_rejects_unknown_contour(self, ef):
        with pytest.raises(DomainError):
            steep_descent_check(ef, "X")


class TestGHelper:
    def test_endpoints_vanish(self):
        for b in (-0.7, 0.2, 0.9):
            assert g_helper(b, 0.0) == 0.0
            assert abs(g_helper(b, math.pi)) < 1e-15

    def test_midpoint(self):
        for b in (0.3, 0.6):
            assert g_helper(b, math.pi / 2) == pytest.approx(b / (1 + b * b))

    def test_scaled_limit(self):
        s = np.linspace(0, math.pi, 11)
        assert np.allclose(g_scaled(0.0, s), np.sin(s))
        assert np.allclose(g_scaled(1e-9, s), np.sin(s), atol=1e-7)

    def test_part1_strict_interior(self):
        lhs = g_scaled(0.2, math.pi / 2)
        rhs = g_scaled(0.5, math.pi / 2)
        assert lhs - rhs > 0

    def test_lemma_margins(self):
        res = lemma_checks(grid_size=256)
        assert res["part1_margin"] > -1e-14
        assert res["part2_margin"] > -1e-14

    def test_scaled_monotone_in_b(self):
        s_grid = np.linspace(0.05, math.pi - 0.05, 30)
        bs = np.linspace(0.05, 0.95, 19)
        for s in s_grid:
            vals = [float(g_scaled(b, s)) for b in bs]
            assert all(y <= x + 1e-14 for x, y in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            g_helper(1.0, 0.5)


class TestIdentities:
    def test_fig_point(self, ef):
        res = identity_checks(ef)
        assert res["f_identity_residual"] < 1e-9
        assert res["one_identity_residual"] < 1e-9

    def test_tolerance_stability(self, fig_params, fig_theta):
        co12 = coefficients(fig_params, fig_theta, fig_params.series_config(1e-12))
        co15 = coefficients(fig_params, fig_theta, fig_params.series_config(1e-15))
        r12 = identity_checks(ExponentFunctions(co12, fig_params), tol=1e-12)
        r15 = identity_checks(ExponentFunctions(co15, fig_params), tol=1e-15)
        assert r15["f_identity_residual"] <= 2 * max(r12["f_identity_residual"], 1e-12)

    def test_random_sweep(self, rng):
        for _ in range(20):
            q = rng.uniform(0.05, 0.45)
            nu = rng.uniform(q, 0.45)
            mu = rng.uniform(nu + 2e-3, 0.5)
            p = ModelParams(q, mu, nu)
            th = rng.uniform(0.05, 0.98 * min(3.0, p.theta_bound))
            res = identity_checks(ExponentFunctions(coefficients(p, th), p))
            assert res["f_identity_residual"] < 1e-8
            assert res["one_identity_residual"] < 1e-8


class TestCircleBranchTracking:
    def test_continuity_refines(self, ef):
        jumps = []
        for n in (200, 400, 800):
            s = np.linspace(-math.pi, math.pi, n)
            vals = ef.f0_on_circle_c(s)
            jumps.append(np.max(np.abs(np.diff(vals))))
        # halving the grid step halves the largest jump: no branch cuts
        assert jumps[1] < 0.6 * jumps[0]
        assert jumps[2] < 0.6 * jumps[1]

    def test_real_part_matches_logabs(self, ef):
        s = np.linspace(-math.pi, math.pi, 257)
        vals = ef.f0_on_circle_c(s)
        ref = ef.f0_real(CircleC(0.2, 0.4).points(s))
        assert np.max(np.abs(vals.real - ref)) < 1e-12

    def test_imaginary_part_winds_with_f_coefficient(self, ef, fig_coeffs):
        # total increment of Im f0 around the circle: the -f log z term is
        # single-valued (circle avoids 0) while the exact k=0 factor
        # contributes i*s, so the total winding is 2 pi
        vals = ef.f0_on_circle_c(np.array([-math.pi + 1e-12, math.pi]))
        total = vals[1].imag - vals[0].imag
        assert total == pytest.approx(2 * math.pi, rel=1e-6)
