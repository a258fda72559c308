import numpy as np
import pytest

from magstep.linalg import commutator, frobenius_norm
from magstep.magnus_steps import QUAD_COMMUTATOR_ROOT
from magstep.verify import (
    CheckReport,
    OracleConfig,
    check_closed_forms,
    check_symmetry_suite,
    interpolant,
    oracle_Mn,
    random_hermitian,
)

from conftest import SX, SZ

CFG = OracleConfig(gl_points_per_axis=8, seed=0, dim=2, dt=1.0)


class TestInterpolant:
    def test_linear_midpoint_is_average(self):
        h = interpolant([SZ, SX], 1, 0.0, 1.0)
        assert np.allclose(h(0.5), 0.5 * (SZ + SX))

    def test_quadratic_exactness(self):
        rng = np.random.default_rng(1)
        poly = lambda t: 0.3 - 1.1 * t + 0.7 * t * t
        dt = 0.8
        samples = [poly(x * dt) * SZ for x in (0.0, 0.5, 1.0)]
        h = interpolant(samples, 2, 0.0, dt)
        for t in rng.uniform(0.0, dt, 50):
            assert np.allclose(h(t), poly(t) * SZ, atol=1e-13)

    def test_cubic_through_thirds(self):
        dt = 1.5
        samples = [(x * dt) ** 3 * SX for x in (0, 1 / 3, 2 / 3, 1.0)]
        h = interpolant(samples, 3, 0.0, dt)
        for t in np.linspace(0, dt, 17):
            assert np.allclose(h(t), t**3 * SX, atol=1e-12)

    def test_degree_zero_is_constant(self):
        h = interpolant([SX], 0, 0.0, 1.0)
        assert np.allclose(h(0.123), SX)

    def test_node_count_mismatch(self):
        with pytest.raises(ValueError, match="samples"):
            interpolant([SZ, SX], 2, 0.0, 1.0)

    def test_degree_out_of_range(self):
        with pytest.raises(ValueError, match="degree"):
            interpolant([SZ] * 6, 5, 0.0, 1.0)


class TestOracleAgainstClosedForms:
    # closed forms of the low-order integrals over a linear interpolant
    def test_single_integral_linear(self):
        rng = np.random.default_rng(2)
        h0, h1 = random_hermitian(rng, 3), random_hermitian(rng, 3)
        dt = 0.7
        h = interpolant([h0, h1], 1, 0.0, dt)
        got = oracle_Mn(h, 1, 0.0, dt, CFG)
        assert np.allclose(got, (dt / 2) * (h0 + h1), atol=1e-14)

    def test_double_integral_linear(self):
        rng = np.random.default_rng(3)
        h0, h1 = random_hermitian(rng, 3), random_hermitian(rng, 3)
        dt = 0.7
        h = interpolant([h0, h1], 1, 0.0, dt)
        got = oracle_Mn(h, 2, 0.0, dt, CFG)
        assert np.allclose(got, (dt**2 / 6) * commutator(h1, h0), atol=1e-14)

    def test_triple_integral_linear(self):
        rng = np.random.default_rng(4)
        h0, h1 = random_hermitian(rng, 3), random_hermitian(rng, 3)
        dt = 0.7
        h = interpolant([h0, h1], 1, 0.0, dt)
        got = oracle_Mn(h, 3, 0.0, dt, CFG)
        expected = (dt**3 / 40) * commutator(h1 - h0, commutator(h1, h0))
        assert np.allclose(got, expected, atol=1e-14)

    def test_degree_zero_commutator_integrals_vanish(self):
        h = interpolant([SZ + SX], 0, 0.0, 1.0)
        for n in (2, 3, 4):
            assert frobenius_norm(oracle_Mn(h, n, 0.0, 1.0, CFG)) == 0.0

    def test_n_out_of_range(self):
        h = interpolant([SZ], 0, 0.0, 1.0)
        with pytest.raises(ValueError):
            oracle_Mn(h, 5, 0.0, 1.0, CFG)

    def test_quadruple_tower_pauli(self):
        # H0 = sz, H1 = sx at dt = 1 against the quadrature value
        h = interpolant([SZ, SX], 1, 0.0, 1.0)
        got = oracle_Mn(h, 4, 0.0, 1.0, CFG)
        c = QUAD_COMMUTATOR_ROOT
        tower = (1.0 / 210.0) * commutator(
            (1 / c) * SZ - SX, commutator(SX - c * SZ, commutator(SX, SZ))
        )
        assert np.allclose(got, tower, atol=1e-12)


@pytest.fixture(scope="module")
def closed_form_report() -> CheckReport:
    return check_closed_forms(OracleConfig(seed=7, dim=3, dt=1.0), draws=10)


@pytest.fixture(scope="module")
def symmetry_report() -> CheckReport:
    return check_symmetry_suite(
        OracleConfig(seed=11, dim=4, dt=0.8), draws=20, oracle_draws=5
    )


class TestCheckClosedForms:
    def test_all_identities_pass(self, closed_form_report):
        failing = [r.identity for r in closed_form_report.rows if not r.passed]
        assert closed_form_report.all_passed, f"failing identities: {failing}"

    def test_expected_identities_present(self, closed_form_report):
        names = {r.identity for r in closed_form_report.rows}
        expected = {
            "m1-simpson",
            "m1-boole",
            "m2-linear",
            "m2-quadratic-sum",
            "m2-quadratic-single",
            "m2-quadratic-forms-agree",
            "m2-cubic",
            "m3-linear",
            "m3-quadratic",
            "m4-linear",
            "m4-linear-alt-root",
            "m4-roots-agree",
            "degree0-m2-vanishes",
            "degree0-m3-vanishes",
            "degree0-m4-vanishes",
            "nested-scalar-1",
            "nested-scalar-2",
            "nested-scalar-3",
            "nested-scalar-4",
        }
        assert expected <= names

    def test_scalar_integrals_tight(self, closed_form_report):
        for k in range(1, 5):
            row = closed_form_report.row(f"nested-scalar-{k}")
            assert row.tolerance == 1e-14
            assert row.passed

    def test_both_roots_agree(self, closed_form_report):
        assert closed_form_report.row("m4-roots-agree").max_rel_dev <= 1e-12

    def test_printed_forms_agree(self, closed_form_report):
        assert closed_form_report.row("m2-quadratic-forms-agree").max_rel_dev <= 1e-13

    def test_small_step(self):
        report = check_closed_forms(OracleConfig(seed=3, dim=2, dt=0.1), draws=5)
        assert report.all_passed


class TestCheckSymmetrySuite:
    def test_all_pass(self, symmetry_report):
        failing = [r.identity for r in symmetry_report.rows if not r.passed]
        assert symmetry_report.all_passed, f"failing checks: {failing}"

    def test_per_method_rows_present(self, symmetry_report):
        names = {r.identity for r in symmetry_report.rows}
        assert "unitarity-me6" in names
        assert "backward-adjoint-blanes6-gauss" in names
        assert "const-roundtrip" in names

    def test_oracle_sign_flip_rows(self, symmetry_report):
        for n in range(1, 5):
            assert symmetry_report.row(f"oracle-sign-flip-m{n}").passed


class TestOracleConfig:
    def test_point_floor(self):
        with pytest.raises(ValueError):
            OracleConfig(gl_points_per_axis=4)

    def test_dim_floor(self):
        with pytest.raises(ValueError):
            OracleConfig(dim=0)
