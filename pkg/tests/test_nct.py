import itertools

import numpy as np
import pytest

from pmentropy import nct, qcore
from pmentropy.errors import ContractViolation
from pmentropy.pmsquare import CONTEXTS, OUTCOMES2, ProductDistribution, observable

from conftest import eig_projector


def brute_products(values):
    """Independent enumeration: every observable value from its defining product."""
    A, a, B, b = values
    table = {"A": A, "a": a, "B": B, "b": b,
             "alpha": A * a, "beta": B * b, "C": A * B, "c": a * b, "gamma": A * B * a * b}
    return [table[x] * table[y] * table[z] for x, y, z in CONTEXTS]


class TestAssignment:
    def test_example(self):
        s = nct.derive_assignment(1, -1, 1, -1)
        assert (s.alpha, s.beta, s.C, s.c, s.gamma) == (-1, -1, 1, 1, 1)

    def test_all_plus(self):
        s = nct.derive_assignment(1, 1, 1, 1)
        assert all(s.value(k) == 1 for k in ("alpha", "beta", "C", "c", "gamma"))

    @pytest.mark.parametrize("values", list(itertools.product((1, -1), repeat=4)))
    def test_all_products_plus(self, values):
        assert nct.derive_assignment(*values).products() == (1,) * 6
        assert brute_products(values) == [1] * 6

    def test_sixteen_base_assignments(self):
        assert len(set(nct.BASE_ASSIGNMENTS)) == 16

    def test_rejects_non_sign(self):
        with pytest.raises(ValueError):
            nct.derive_assignment(1, 0, 1, 1)


class TestPairDistribution:
    def test_basis_aa_uniform(self):
        d = nct.pair_distribution(qcore.state_factory("Psi1"), ("A", "a"))
        np.testing.assert_allclose(d.probs, 0.25, atol=1e-12)

    def test_mixed_AB_uniform(self):
        d = nct.pair_distribution(np.eye(4) / 4, ("A", "B"))
        np.testing.assert_allclose(d.probs, 0.25, atol=1e-12)

    def test_against_projector_oracle(self, random_states):
        for rho in random_states[::10]:
            for pair in nct.PAIRS:
                p, q = (observable(i) for i in pair)
                expected = [np.real(np.trace(rho @ eig_projector(p, s) @ eig_projector(q, t))) for s, t in OUTCOMES2]
                np.testing.assert_allclose(nct.pair_distribution(rho, pair).probs, expected, atol=1e-12)

    def test_marginals_match_born(self, random_states):
        for rho in random_states[::10]:
            for pair in nct.PAIRS:
                d = nct.pair_distribution(rho, pair)
                for pos, obs_id in enumerate(pair, start=1):
                    born = (1 + qcore.expectation(rho, observable(obs_id))) / 2
                    assert d.marginal(pos).p_plus == pytest.approx(born, abs=1e-10)

    @pytest.mark.parametrize("pair", [("A", "b"), ("a", "B"), ("A", "alpha")])
    def test_rejects_other_pairs(self, pair):
        with pytest.raises(ValueError):
            nct.pair_distribution(np.eye(4) / 4, pair)


class TestClassicalProducts:
    def test_any_state_deterministic_plus(self, random_states):
        for rho in random_states[::5]:
            qs = nct.classical_products(rho)
            assert len(qs) == 6
            for q in qs:
                assert q.p_plus == pytest.approx(1, abs=1e-12)

    def test_maximally_mixed(self):
        for q in nct.classical_products(np.eye(4) / 4):
            assert q.p_plus == pytest.approx(1, abs=1e-12)

    def test_base_distribution_batched(self):
        rng = np.random.default_rng(0)
        aa = rng.dirichlet(np.ones(4), size=(3, 5))
        bb = rng.dirichlet(np.ones(4), size=(3, 5))
        base = nct.base_distribution(aa, bb)
        assert base.shape == (3, 5, 16)
        np.testing.assert_allclose(base.sum(axis=-1), 1, atol=1e-12)
        np.testing.assert_allclose(nct.classical_parity_minus(base), 0, atol=1e-15)

    def test_parity_of_arbitrary_base(self):
        # any distribution over base assignments, not just product ones
        base = np.random.default_rng(1).dirichlet(np.ones(16))
        assert np.all(nct.classical_parity_minus(base) == 0)


class TestMix:
    def test_opposite(self):
        m = nct.mix(ProductDistribution(0, 1), ProductDistribution(1, 0))
        assert (m.p_plus, m.p_minus) == (0.5, 0.5)

    def test_fixed_point(self):
        m = nct.mix(ProductDistribution(1, 0), ProductDistribution(1, 0))
        assert (m.p_plus, m.p_minus) == (1, 0)

    def test_affine_and_normalized(self):
        rng = np.random.default_rng(2)
        for p, r in rng.random((50, 2)):
            m = nct.mix(ProductDistribution(1 - p, p), ProductDistribution(1 - r, r))
            assert m.p_minus == (p + r) / 2
            assert m.p_plus + m.p_minus == pytest.approx(1, abs=1e-15)

    def test_invalid_input(self):
        with pytest.raises(ContractViolation):
            nct.mix(ProductDistribution(0.3, 0.3), ProductDistribution(1, 0))
