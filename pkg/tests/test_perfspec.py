import math
import random

import pytest

from ppcsat.bounds import deriv_envelope
from ppcsat.perfspec import (
    PerformanceSpec,
    derive_vpc,
    lambda_coeffs,
    psi_at,
    weighted_binom_sum,
)


class TestLambdaCoeffs:
    def test_second_order(self):
        assert lambda_coeffs(2, 2.0) == (2.0,)

    def test_first_order_empty(self):
        assert lambda_coeffs(1, 3.7) == ()

    def test_fourth_order(self):
        assert lambda_coeffs(4, 3.0) == (27.0, 27.0, 9.0)

    def test_matches_binomial_expansion(self):
        # [lam_1..lam_{n-1}, 1] are the coefficients of (s+a)^(n-1)
        rng = random.Random(3)
        for n in range(1, 13):
            a = rng.uniform(0.5, 5.0)
            lams = lambda_coeffs(n, a) + (1.0,)
            expected = tuple(
                math.comb(n - 1, k) * a ** (n - 1 - k) for k in range(n)
            )
            for got, want in zip(lams, expected):
                assert got == pytest.approx(want, rel=1e-12)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            lambda_coeffs(0, 1.0)
        with pytest.raises(ValueError):
            lambda_coeffs(2, 0.0)


class TestDeriveVpc:
    def test_benchmark_parameters(self):
        vs = derive_vpc(PerformanceSpec(1.0, 0.01, 1.0), a=2.0, n=2)
        assert vs.mu_r == 1.0
        assert vs.psi_r0 == 1.0
        assert vs.psi_r_inf == 0.02
        assert vs.lambdas == (2.0,)

    def test_first_order_coincides_with_ppc(self):
        pps = PerformanceSpec(0.7, 0.05, 0.3)
        vs = derive_vpc(pps, a=1.5, n=1)
        assert vs.psi_r0 == pps.psi0
        assert vs.psi_r_inf == pps.psi_inf
        assert vs.lambdas == ()

    def test_third_order(self):
        vs = derive_vpc(PerformanceSpec(1.0, 0.01, 1.0), a=3.0, n=3)
        assert vs.psi_r0 == pytest.approx(4.0)
        assert vs.psi_r_inf == pytest.approx(0.09)

    def test_a_equal_mu_rejected(self):
        with pytest.raises(ValueError):
            derive_vpc(PerformanceSpec(1.0, 0.01, 1.0), a=1.0, n=2)

    def test_spec_invariants(self):
        with pytest.raises(ValueError):
            PerformanceSpec(0.0, 0.01, 1.0)
        with pytest.raises(ValueError):
            PerformanceSpec(1.0, -0.01, 1.0)
        with pytest.raises(ValueError):
            PerformanceSpec(1.0, 0.01, -1.0)


class TestPsiAt:
    def test_initial_value(self):
        assert psi_at(1.0, 0.01, 1.0, 0.0) == 1.01

    def test_decayed_value(self):
        assert psi_at(1.0, 0.01, 1.0, 10.0) == pytest.approx(0.0100454, abs=1e-7)

    def test_zero_decay_constant(self):
        for t in (0.0, 1.0, 100.0):
            assert psi_at(2.0, 0.5, 0.0, t) == 2.5

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            psi_at(1.0, 0.01, 1.0, -1.0)

    def test_monotone_nonincreasing_with_derivative_bound(self):
        rng = random.Random(17)
        for _ in range(200):
            psi0 = rng.uniform(0.1, 5.0)
            psi_inf = rng.uniform(0.001, 1.0)
            mu = rng.uniform(0.0, 3.0)
            t1 = rng.uniform(0.0, 10.0)
            t2 = t1 + rng.uniform(0.0, 10.0)
            assert psi_at(psi0, psi_inf, mu, t2) <= psi_at(psi0, psi_inf, mu, t1)
            h = 1e-6
            dpsi = (psi_at(psi0, psi_inf, mu, t1 + h) - psi_at(psi0, psi_inf, mu, t1)) / h
            assert -mu * psi0 - 1e-6 <= dpsi <= 1e-12


class TestWeightedBinomSum:
    @staticmethod
    def brute_force(a, h, n):
        return sum(
            math.comb(n - 1, n - i) * a ** (n - i) * h**i for i in range(1, n)
        )

    def test_single_term(self):
        a, h = 1.7, 0.3
        assert weighted_binom_sum(a, h, 2) == pytest.approx(a * h, rel=1e-15)

    def test_small_case(self):
        assert weighted_binom_sum(1.0, 2.0, 3) == pytest.approx(10.0)
        assert self.brute_force(1.0, 2.0, 3) == 10.0

    def test_fifth_order(self):
        assert weighted_binom_sum(2.0, 3.0, 5) == pytest.approx(1632.0)
        assert self.brute_force(2.0, 3.0, 5) == 1632.0

    def test_identity_random(self):
        rng = random.Random(42)
        for _ in range(1000):
            a = rng.uniform(1e-9, 10.0)
            h = rng.uniform(1e-9, 10.0)
            n = rng.randint(1, 10)
            closed = weighted_binom_sum(a, h, n)
            brute = self.brute_force(a, h, n)
            assert closed == pytest.approx(brute, rel=1e-9, abs=1e-12)


class TestFunnelRecovery:
    def test_error_funnel_recovered(self):
        rng = random.Random(8)
        for _ in range(200):
            pps = PerformanceSpec(
                rng.uniform(0.1, 5.0), rng.uniform(0.001, 1.0), rng.uniform(0.0, 2.0)
            )
            a = pps.mu + rng.uniform(0.1, 5.0)
            n = rng.randint(1, 6)
            vs = derive_vpc(pps, a, n)
            env = deriv_envelope(vs, n, 0)
            assert env.amp == pytest.approx(pps.psi0, rel=1e-13)
            assert env.rate == pps.mu
            assert env.floor == pytest.approx(pps.psi_inf, rel=1e-13)
