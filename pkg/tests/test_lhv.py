"""Classical bounds, joint-distribution feasibility, and no-disturbance LPs."""

import numpy as np
import pytest

from corrineq import catalog
from corrineq.dsl import ScenarioSpec, VariableId
from corrineq.errors import (
    ProvisoViolated,
    TermOutsideContext,
    TooManyVariables,
    UnknownVariable,
)
from corrineq.lhv import (
    DeterministicAssignment,
    DhvModel,
    JointDistribution,
    classical_extrema,
    correlator_from_jd,
    dhv_to_jd,
    jd_feasibility,
    monogamy_check,
    nodisturbance_optimum,
    random_dhv_model,
    reconstruct_pc,
)
from corrineq.polynomials import MultilinearPoly, derive_inequality


def x(i):
    return VariableId("X", i)


def y(i):
    return VariableId("Y", i)


INV_SQRT2 = 1.0 / np.sqrt(2.0)


def singlet_chsh_correlators():
    return {
        frozenset({x(1), y(1)}): INV_SQRT2,
        frozenset({x(1), y(2)}): INV_SQRT2,
        frozenset({x(2), y(1)}): INV_SQRT2,
        frozenset({x(2), y(2)}): -INV_SQRT2,
    }


class TestClassicalExtrema:
    def test_chsh(self):
        res = classical_extrema(derive_inequality(catalog.chsh_source()))
        assert (res.minimum, res.maximum) == (-2, 2)
        assert res.assignments_checked == 16

    def test_kcbs(self):
        res = classical_extrema(derive_inequality(catalog.kcbs_source()))
        assert (res.minimum, res.maximum) == (-3, 5)

    def test_single_monomial(self):
        poly = MultilinearPoly({frozenset({x(1), y(1)}): 1})
        res = classical_extrema(poly)
        assert (res.minimum, res.maximum) == (-1, 1)

    def test_witnesses_attain_extrema(self):
        ineq = derive_inequality(catalog.hybrid_source())
        res = classical_extrema(ineq)
        poly = ineq.as_poly()
        assert poly.evaluate(res.witness_min.values) == res.minimum
        assert poly.evaluate(res.witness_max.values) == res.maximum

    def test_threaded_matches_sequential(self):
        ineq = derive_inequality(catalog.monogamy_source())
        seq = classical_extrema(ineq)
        par = classical_extrema(ineq, workers=4, chunk_size=16)
        assert (seq.minimum, seq.maximum) == (par.minimum, par.maximum)
        assert seq.witness_min == par.witness_min
        assert seq.witness_max == par.witness_max

    def test_variable_cap(self):
        poly = MultilinearPoly(
            {frozenset({x(i), x(i + 1)}): 1 for i in range(1, 30)}
        )
        with pytest.raises(TooManyVariables):
            classical_extrema(poly)


class TestModelsAndDistributions:
    def test_assignment_validation(self):
        with pytest.raises(ValueError):
            DeterministicAssignment({x(1): 2})

    def test_model_weight_validation(self):
        good = DeterministicAssignment({x(1): 1})
        with pytest.raises(ValueError):
            DhvModel(((good, 0.2),))
        with pytest.raises(ValueError):
            DhvModel(((good, -0.1), (good, 1.1)))

    def test_model_correlators_match_jd(self):
        rng = np.random.default_rng(5)
        names = (x(1), x(2), y(1), y(2))
        for _ in range(20):
            model = random_dhv_model(names, rng)
            jd = dhv_to_jd(model)
            for a, b in ((x(1), y(1)), (x(2), y(2)), (x(1), x(2))):
                assert model.correlator(a, b) == pytest.approx(
                    jd.correlator(a, b), abs=1e-12
                )
                assert correlator_from_jd(jd, a, b) == jd.correlator(a, b)
            for var in names:
                assert model.mean(var) == pytest.approx(jd.mean(var), abs=1e-12)

    def test_jd_unknown_variable(self):
        model = random_dhv_model((x(1), x(2)), np.random.default_rng(0))
        jd = dhv_to_jd(model)
        with pytest.raises(UnknownVariable):
            jd.correlator(x(1), y(9))

    def test_jd_normalization_enforced(self):
        with pytest.raises(ValueError):
            JointDistribution((x(1),), {(1,): 0.4, (-1,): 0.4})


class TestJdFeasibility:
    def test_singlet_chsh_infeasible(self):
        result = jd_feasibility(catalog.chsh_scenario(), singlet_chsh_correlators())
        assert not result.feasible
        cert = result.certificate
        assert cert.violation > 0.5
        assert cert.bound == pytest.approx(2.0, abs=1e-9)
        # the certificate bound is the exact deterministic maximum
        combo = MultilinearPoly(
            {pair: 1 for pair in cert.pair_coefficients}
        )
        values = []
        for bits in range(16):
            assign = {
                v: 1 if (bits >> i) & 1 else -1
                for i, v in enumerate(sorted(combo.variables()))
            }
            values.append(
                sum(
                    c * np.prod([assign[v] for v in pair])
                    for pair, c in cert.pair_coefficients.items()
                )
            )
        assert max(values) == pytest.approx(cert.bound, abs=1e-9)

    def test_random_models_round_trip(self):
        rng = np.random.default_rng(11)
        scenario = catalog.chsh_scenario()
        names = tuple(scenario.variables)
        pairs = [frozenset(ctx) for ctx in scenario.contexts]
        for _ in range(100):
            model = random_dhv_model(names, rng, support_size=int(rng.integers(1, 6)))
            observed = {
                pair: model.correlator(*sorted(pair)) for pair in pairs
            }
            means = {v: model.mean(v) for v in names}
            result = jd_feasibility(scenario, observed, means)
            assert result.feasible
            for pair, value in observed.items():
                assert result.model.correlator(*sorted(pair)) == pytest.approx(
                    value, abs=1e-6
                )
            for var, value in means.items():
                assert result.model.mean(var) == pytest.approx(value, abs=1e-6)

    def test_scaled_tsirelson_feasible_below_bound(self):
        # shrinking the singlet correlators under the classical bound
        # restores a joint distribution
        scaled = {
            pair: value * 0.7 for pair, value in singlet_chsh_correlators().items()
        }
        result = jd_feasibility(catalog.chsh_scenario(), scaled)
        assert result.feasible

    def test_lg_temporal_data(self):
        scenario = catalog.lg_scenario()
        j, k, l, m = (VariableId(c) for c in "JKLM")
        quantum = {
            frozenset({j, k}): INV_SQRT2,
            frozenset({k, l}): INV_SQRT2,
            frozenset({l, m}): INV_SQRT2,
            frozenset({j, m}): -INV_SQRT2,
        }
        assert not jd_feasibility(scenario, quantum).feasible


class TestNoDisturbance:
    def test_chsh_nd_max_is_pr_box(self):
        ineq = derive_inequality(catalog.chsh_source())
        objective = {m.variables: float(m.coefficient) for m in ineq.terms}
        opt = nodisturbance_optimum(catalog.chsh_scenario(), objective, "max")
        assert opt.value == pytest.approx(4.0, abs=1e-8)
        assert opt.consistent

    def test_kcbs_nd_min_beats_classical(self):
        ineq = derive_inequality(catalog.kcbs_source())
        objective = {m.variables: float(m.coefficient) for m in ineq.terms}
        opt = nodisturbance_optimum(catalog.kcbs_scenario(), objective, "min")
        assert opt.value == pytest.approx(-5.0, abs=1e-8)

    def test_term_outside_context(self):
        objective = {frozenset({x(1), x(2)}): 1.0}
        with pytest.raises(TermOutsideContext):
            nodisturbance_optimum(catalog.chsh_scenario(), objective, "max")

    def test_behavior_is_normalized(self):
        ineq = derive_inequality(catalog.chsh_source())
        objective = {m.variables: float(m.coefficient) for m in ineq.terms}
        opt = nodisturbance_optimum(catalog.chsh_scenario(), objective, "max")
        for table in opt.behavior:
            total = sum(table.values())
            assert total == pytest.approx(1.0, abs=1e-8)
            assert min(table.values()) >= -1e-9


@pytest.fixture(scope="module")
def monogamy_report():
    derived = derive_inequality(catalog.monogamy_source())
    chsh_terms, kcbs_terms = {}, {}
    for mono in derived.terms:
        bucket = (
            chsh_terms if any(v.letter == "Y" for v in mono.variables) else kcbs_terms
        )
        bucket[mono.variables] = mono.coefficient
    return monogamy_check(catalog.monogamy_scenario(), chsh_terms, kcbs_terms)


class TestMonogamy:
    def test_combined_bound(self, monogamy_report):
        report = monogamy_report
        assert report.combined_nd_min == pytest.approx(-5.0, abs=1e-7)
        assert report.agreement

    def test_parts(self, monogamy_report):
        report = monogamy_report
        assert report.chsh_nd_min == pytest.approx(-4.0, abs=1e-7)
        assert report.kcbs_nd_min == pytest.approx(-5.0, abs=1e-7)
        assert report.kcbs_classical_min == -3

    def test_relaxation_drops_below(self, monogamy_report):
        report = monogamy_report
        assert report.relaxed_min == pytest.approx(-9.0, abs=1e-7)
        assert report.relaxed_min < report.combined_nd_min - 1.0

    def test_rejects_mismatched_split(self):
        with pytest.raises(ValueError):
            monogamy_check(
                catalog.monogamy_scenario(),
                {frozenset({x(1), y(1)}): 1},
                {frozenset({x(1), x(2)}): 1},
            )


class TestReconstruction:
    @staticmethod
    def _tables_from_joint(joint):
        """Split p(x1, x2, x3, y) into its two overlapping marginals."""
        a = joint.sum(axis=2)               # (x1, x2, y)
        b = joint.sum(axis=0)               # (x2, x3, y)
        return a, b

    def test_product_input_factorizes(self):
        px1 = np.array([0.3, 0.7])
        px2 = np.array([0.6, 0.4])
        py = np.array([0.25, 0.75])
        a = np.einsum("i,j,k->ijk", px1, px2, py)
        b = np.einsum("i,j,k->ijk", px2, np.array([0.5, 0.5]), py)
        out = reconstruct_pc(a, b)
        assert out.shape == (2, 2, 2, 2)
        assert out.min() >= 0.0
        assert out.sum() == pytest.approx(1.0, abs=1e-12)
        # x1 stays independent of x3 cell by cell
        for x2_idx in range(2):
            for y_idx in range(2):
                block = out[:, :, y_idx, x2_idx]
                if block.sum() > 0:
                    outer = np.outer(block.sum(axis=1), block.sum(axis=0))
                    assert np.abs(block * block.sum() - outer).max() < 1e-12

    def test_marginals_recovered(self):
        rng = np.random.default_rng(9)
        joint = rng.random((2, 2, 2, 2))
        joint /= joint.sum()
        a, b = self._tables_from_joint(joint)
        out = reconstruct_pc(a, b)
        # out axes are (x1, x3, y, x2)
        a_back = out.sum(axis=1).transpose(0, 2, 1)   # -> (x1, x2, y)
        b_back = out.sum(axis=0).transpose(2, 0, 1)   # -> (x2, x3, y)
        assert np.abs(a_back - a).max() < 1e-9
        assert np.abs(b_back - b).max() < 1e-9

    def test_proviso_violated(self):
        rng = np.random.default_rng(2)
        a = rng.random((2, 2, 2))
        a /= a.sum()
        b = rng.random((2, 2, 2))
        b /= b.sum()
        with pytest.raises(ProvisoViolated):
            reconstruct_pc(a, b)

    def test_zero_marginal_with_no_mass_is_fine(self):
        joint = np.zeros((2, 2, 2, 2))
        joint[0, 0, 0, 0] = 1.0   # all mass on one cell
        a, b = self._tables_from_joint(joint)
        out = reconstruct_pc(a, b)
        assert out.sum() == pytest.approx(1.0, abs=1e-12)
