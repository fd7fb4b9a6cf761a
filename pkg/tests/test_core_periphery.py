import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from equispec.core_periphery import (
    CorePeripheryParams,
    analytic_density,
    analytic_density_delta_form,
    band_weight,
    cavity_alpha_beta,
    isolated_eigenvalues,
    kesten_mckay_density,
    mu,
    quotient_eigenvalues,
    spectral_summary,
    support_intervals,
    zero_eigenvalue_count,
)
from equispec.empirical import exact_eigenvalues
from equispec.errors import DomainError
from equispec.graphs import BlockStructure, generate_equitable


def km_oracle(lam, k):
    """Kesten-McKay law written out independently of the package."""
    if lam * lam >= 4 * (k - 1):
        return 0.0
    return k * math.sqrt(4 * (k - 1) - lam * lam) / (2 * math.pi * (k * k - lam * lam))


def band_points(k, kp, n, margin=1e-6):
    pts = []
    for lo, hi in support_intervals(k, kp):
        pts.append(np.linspace(lo + margin, hi - margin, n))
    return np.concatenate(pts)


degrees = st.tuples(st.integers(2, 25), st.integers(1, 12))


class TestMu:
    @pytest.mark.parametrize("lam, kp, expected", [(2.0, 4, 0.0), (4.0, 4, 3.0), (math.sqrt(7), 7, 0.0)])
    def test_values(self, lam, kp, expected):
        assert mu(lam, kp) == pytest.approx(expected, abs=1e-15)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            mu(0.0, 4)


class TestAlphaBeta:
    def test_centre_of_band(self):
        a, b = cavity_alpha_beta(2.0, 10, 4)
        assert a == pytest.approx(0.0, abs=1e-15)
        assert b == pytest.approx(1 / 3)

    def test_band_edge(self):
        k, kp = 10, 4
        lam = support_intervals(k, kp)[1][1]
        a, b = cavity_alpha_beta(lam, k, kp)
        assert b == pytest.approx(0.0, abs=1e-6)
        assert a == pytest.approx(1 / 3, abs=1e-6)

    def test_lambda_three(self):
        a, b = cavity_alpha_beta(3.0, 10, 4)
        assert a == pytest.approx(5 / 54, rel=1e-14)
        assert b == pytest.approx(math.sqrt(36 - 25 / 9) / 18, rel=1e-14)
        d = complex(a, b)
        assert abs(9 * d * d - (5 / 3) * d + 1) < 1e-12

    def test_far_off_band_tends_to_inverse_mu(self):
        a, b = cavity_alpha_beta(1e4, 10, 4)
        assert b == 0.0
        assert a == pytest.approx(1 / mu(1e4, 4), rel=1e-6)
        a, _ = cavity_alpha_beta(-1e4, 10, 4)
        assert a < 0

    def test_k_one_unsupported(self):
        with pytest.raises(DomainError):
            cavity_alpha_beta(1.0, 1, 4)

    @settings(max_examples=200, deadline=None)
    @given(degrees, st.floats(-40, 40))
    def test_root_identity(self, kk, lam):
        k, kp = kk
        assume(abs(lam) > 1e-3)
        a, b = cavity_alpha_beta(lam, k, kp)
        d = complex(a, b)
        m = mu(lam, kp)
        assert abs((k - 1) * d * d - m * d + 1) < 1e-12 * max(1.0, abs(m))
        assert b >= 0
        assert abs(d) <= 1 / math.sqrt(k - 1) + 1e-12


class TestSupport:
    def test_reference_parameters(self):
        (a, b), (c, d) = support_intervals(10, 4)
        r = math.sqrt(13)
        assert (a, b, c, d) == pytest.approx((-3 - r, -(r - 3), r - 3, 3 + r), abs=1e-14)
        for x in (a, b, c, d):
            assert abs(abs(x - 4 / x) - 6) < 1e-12

    def test_gap_closes(self):
        assert support_intervals(5, 0) == [(-4.0, 4.0)]

    def test_k2_kp1(self):
        r = math.sqrt(2)
        assert support_intervals(2, 1) == pytest.approx([(-1 - r, -(r - 1)), (r - 1, 1 + r)])


class TestAnalyticDensity:
    def test_centre_value(self):
        assert analytic_density(2.0, 10, 4) == pytest.approx(3 / (10 * math.pi), rel=1e-14)

    def test_outside_support_and_origin(self):
        assert analytic_density(0.3, 10, 4) == 0.0
        assert analytic_density(7.0, 10, 4) == 0.0
        assert analytic_density(0.0, 10, 4) == 0.0

    def test_array_input(self):
        out = analytic_density(np.array([0.0, 2.0, 7.0]), 10, 4)
        assert out.shape == (3,)

    def test_kesten_mckay_reduction(self):
        for lam in np.linspace(-3, 3, 61):
            assert analytic_density(lam, 3, 0) == pytest.approx(km_oracle(lam, 3), abs=1e-14)
            assert analytic_density_delta_form(lam, 3, 0) == pytest.approx(km_oracle(lam, 3), abs=1e-12)

    def test_kesten_mckay_unreduced_form_is_half(self):
        # the general formula evaluated at kp=0 carries half the mass per band
        k = 4
        for lam in (-2.5, -1.0, 0.5, 2.0):
            m = lam
            general = k / (2 * math.pi) * math.sqrt((k - 1) - m * m / 4) / (k * k - m * m)
            assert general == pytest.approx(0.5 * km_oracle(lam, k), rel=1e-13)

    @pytest.mark.parametrize("k, kp", [(10, 4), (3, 1), (5, 2), (2, 1), (20, 9)])
    def test_two_forms_agree(self, k, kp):
        lam = band_points(k, kp, 400)
        np.testing.assert_allclose(analytic_density_delta_form(lam, k, kp), analytic_density(lam, k, kp), rtol=0, atol=1e-12)

    @pytest.mark.parametrize("k, kp", [(10, 4), (3, 1), (5, 2), (7, 0)])
    def test_unit_mass(self, k, kp):
        total = sum(
            integrate.quad(lambda x: analytic_density(x, k, kp), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
            for lo, hi in support_intervals(k, kp)
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("k, kp", [(10, 4), (3, 1), (6, 3)])
    def test_vanishes_at_band_edges(self, k, kp):
        for lo, hi in support_intervals(k, kp):
            assert analytic_density(lo + 1e-9, k, kp) < 1e-3
            assert analytic_density(hi - 1e-9, k, kp) < 1e-3

    @settings(max_examples=100, deadline=None)
    @given(degrees, st.floats(-0.99, 0.99))
    def test_band_symmetry(self, kk, t):
        k, kp = kk
        m = 2 * math.sqrt(k - 1) * t
        disc = math.sqrt(m * m + 4 * kp)
        lam1, lam2 = (m - disc) / 2, (m + disc) / 2
        lhs = analytic_density(lam1, k, kp) * lam1**2 / (lam1**2 + kp)
        rhs = analytic_density(lam2, k, kp) * lam2**2 / (lam2**2 + kp)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-14)
        assert lhs == pytest.approx(0.5 * km_oracle(m, k), rel=1e-9, abs=1e-14)


class TestIsolatedAndZeros:
    def test_reference_values(self):
        lm, lp = isolated_eigenvalues(10, 4)
        assert lp == pytest.approx(5 + math.sqrt(29), rel=1e-15)
        assert lm == pytest.approx(5 - math.sqrt(29), rel=1e-14)
        assert lm == pytest.approx(-0.3851648071345040, abs=1e-13)
        assert lp == pytest.approx(10.385164807134504, abs=1e-13)

    def test_regular_limit(self):
        assert isolated_eigenvalues(6, 0) == (0.0, 6.0)

    def test_star_matching(self):
        assert isolated_eigenvalues(0, 1) == (-1.0, 1.0)

    @pytest.mark.parametrize("nc, np_, expected", [(500, 2000, 1500), (7, 7, 0), (100, 400, 300)])
    def test_zero_count(self, nc, np_, expected):
        assert zero_eigenvalue_count(nc, np_) == expected

    def test_zero_count_domain(self):
        with pytest.raises(DomainError):
            zero_eigenvalue_count(10, 5)


class TestQuotient:
    def test_core_periphery_matches_isolated(self):
        q = quotient_eigenvalues(BlockStructure((25, 100), ((10, 4), (1, 0))))
        np.testing.assert_allclose(q, isolated_eigenvalues(10, 4), atol=1e-12)

    def test_single_block(self):
        np.testing.assert_allclose(quotient_eigenvalues(BlockStructure((8,), ((3,),))), [3.0])

    def test_bipartite(self):
        q = quotient_eigenvalues(BlockStructure((6, 4), ((0, 2), (3, 0))))
        np.testing.assert_allclose(q, [-math.sqrt(6), math.sqrt(6)], atol=1e-12)

    def test_present_in_sampled_spectrum(self):
        s = BlockStructure((25, 100), ((10, 4), (1, 0)))
        eigs = exact_eigenvalues(generate_equitable(s, 4))
        for q in quotient_eigenvalues(s):
            assert np.min(np.abs(eigs - q)) < 1e-8


def test_band_weight():
    assert band_weight(4) == pytest.approx(0.4)
    assert band_weight(0) == 1.0


def test_params_invariants():
    with pytest.raises(DomainError):
        CorePeripheryParams(1, 4, 10)
    with pytest.raises(DomainError):
        CorePeripheryParams(3, 0, 10)
    p = CorePeripheryParams(10, 4, 500)
    assert p.n_periphery == 2000
    assert p.structure().sizes == (500, 2000)


def test_summary_json_fields():
    s = spectral_summary(CorePeripheryParams(10, 4, 500))
    d = s.to_dict()
    assert set(d) == {"k", "kp", "n_core", "support", "lambda_minus", "lambda_plus", "zero_multiplicity", "continuous_fraction"}
    assert d["zero_multiplicity"] == 1500
    assert d["continuous_fraction"] == pytest.approx(998 / 2500)
    assert len(d["support"]) == 2 and d["support"][0][0] < d["support"][0][1] < d["support"][1][0]
    assert s.lambda_minus < 0 < s.lambda_plus
