import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmentropy import entropic, nct, pmsquare as pm
from pmentropy.errors import ContractViolation
from pmentropy.pmsquare import ProductDistribution


def oracle_h(p):
    return -sum(x * math.log(x, 2) for x in (p, 1 - p) if x > 0)


def pd(p_minus):
    return ProductDistribution(1 - p_minus, p_minus)


class TestBinary:
    def test_degenerate(self):
        assert entropic.h_binary(ProductDistribution(1, 0)) == 0

    def test_uniform(self):
        assert entropic.h_binary(ProductDistribution(0.5, 0.5)) == 1

    def test_example(self):
        h = entropic.h_binary(ProductDistribution(0.9, 0.1))
        assert h == pytest.approx(0.46900, abs=1e-5)
        assert h == pytest.approx(oracle_h(0.1), abs=1e-14)

    def test_tiny_probability(self):
        assert entropic.h_binary(ProductDistribution(1 - 1e-320, 1e-320)) == 0
        assert np.isfinite(entropic.binary_entropy(1e-310))

    def test_unnormalized(self):
        with pytest.raises(ContractViolation):
            entropic.h_binary(SimpleNamespace(p_plus=0.6, p_minus=0.6))

    @given(st.floats(0, 1))
    def test_symmetry_and_oracle(self, p):
        assert entropic.h_binary(pd(p)) == entropic.h_binary(ProductDistribution(p, 1 - p))
        assert entropic.h_binary(pd(p)) == pytest.approx(oracle_h(p), abs=1e-12)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_concavity(self, lam, p1, p2):
        mixed = entropic.h_binary(pd(lam * p1 + (1 - lam) * p2))
        assert mixed >= lam * entropic.h_binary(pd(p1)) + (1 - lam) * entropic.h_binary(pd(p2)) - 1e-12

    def test_vectorized(self):
        ps = np.linspace(0, 1, 11)
        np.testing.assert_allclose(entropic.binary_entropy(ps), [oracle_h(p) for p in ps], atol=1e-14)

    def test_linear_sigma(self):
        assert entropic.linear_entropy_sigma(0.0, 100) == math.inf
        assert entropic.linear_entropy_sigma(0.5, 100) == 0
        assert entropic.linear_entropy_sigma(0.01, 10000) == pytest.approx(
            math.log2(99) * math.sqrt(0.01 * 0.99 / 10000))


class TestTerms:
    def test_ideal_quantum(self):
        s = entropic.inequality_terms([pd(0)] * 5 + [pd(1)])
        assert s.as_tuple() == (0,) * 6

    def test_ideal_mixed(self):
        s = entropic.inequality_terms([pd(0)] * 5 + [pd(0.5)])
        assert s.as_tuple() == (0, 0, 0, 0, 0, 1)

    def test_uniform(self):
        assert entropic.inequality_terms([pd(0.5)] * 6).as_tuple() == (1,) * 6

    @pytest.mark.parametrize("n", [5, 7])
    def test_wrong_count(self, n):
        with pytest.raises(ValueError):
            entropic.inequality_terms([pd(0)] * n)

    def test_order_follows_context_list(self):
        assert entropic.TERM_LABELS[0] == "H(A.a.alpha)"
        assert entropic.TERM_LABELS[5] == "H(alpha.beta.gamma)"
        s = entropic.inequality_terms([pd(0.1 * k) for k in range(6)])
        assert s.as_tuple() == pytest.approx([oracle_h(0.1 * k) for k in range(6)])

    def test_sextet_range(self):
        with pytest.raises(ContractViolation):
            entropic.EntropySextet(0, 0, 0, 0, 0, 1.5)


class TestEvaluate:
    def test_maximal_violation(self):
        v = entropic.evaluate(entropic.EntropySextet(0, 0, 0, 0, 0, 1))
        assert v.margin == 1 and v.violated

    def test_zero(self):
        v = entropic.evaluate(entropic.EntropySextet(0, 0, 0, 0, 0, 0))
        assert v.margin == 0 and not v.violated

    def test_reported_row(self):
        # published terms of the first catalog row
        v = entropic.evaluate(entropic.EntropySextet(0.03441, 0.04503, 0.05584, 0.04615, 0.06022, 0.99988))
        assert v.margin == pytest.approx(0.75823, abs=1e-5)
        assert v.lhs == 0.99988
        assert v.rhs == pytest.approx(0.24165, abs=1e-12)
        assert v.violated

    def test_violated_iff_positive(self):
        rng = np.random.default_rng(0)
        for hs in rng.random((100, 6)) * 0.3:
            v = entropic.evaluate(entropic.EntropySextet(*hs))
            assert v.violated == (v.margin > 0)
            assert v.lhs - v.rhs == v.margin


class TestStateInvariants:
    def test_classical_satisfies(self, random_states):
        for rho in random_states[::10]:
            v = entropic.evaluate(entropic.inequality_terms(nct.classical_products(rho)))
            assert abs(v.margin) <= 1e-12

    def test_quantum_unmixed_satisfies(self, random_states):
        for rho in random_states:
            qs = [pm.product_distribution(pm.joint_distribution(rho, c)) for c in pm.CONTEXTS]
            v = entropic.evaluate(entropic.inequality_terms(qs))
            assert v.margin <= 1e-10

    def test_mixed_maximal_violation(self, random_states):
        for rho in random_states:
            qs = [pm.product_distribution(pm.joint_distribution(rho, c)) for c in pm.CONTEXTS]
            mixed = [nct.mix(q, qp) for q, qp in zip(qs, nct.classical_products(rho))]
            v = entropic.evaluate(entropic.inequality_terms(mixed))
            assert v.margin == pytest.approx(1, abs=1e-10)
