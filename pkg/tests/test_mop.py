import csv

import numpy as np
import pytest

from angelesco import (
    BaseMeasure,
    EnsembleSpec,
    MonicPolynomial,
    MultiIndex,
    MultiIndexSequence,
    expectation_identity_check,
    moments,
    solve_mop,
)
from angelesco.mop import CONDITION_GUARD, export_csv
from angelesco.errors import IllConditionedSystem


@pytest.fixture(scope="module")
def unit_spec(unit):
    return EnsembleSpec(
        unit,
        None,
        (BaseMeasure.lebesgue(unit, 0),),
        MultiIndexSequence.proportional((1.0,), start=1, step=1),
    )


@pytest.fixture(scope="module")
def sym_spec(sym):
    return EnsembleSpec(
        sym,
        None,
        (BaseMeasure.lebesgue(sym, 0),),
        MultiIndexSequence.proportional((1.0,), start=1, step=1),
    )


@pytest.fixture(scope="module")
def pair_spec(two):
    base = tuple(BaseMeasure.lebesgue(two, i) for i in range(2))
    seq = MultiIndexSequence.proportional(two.r, start=2, step=2)
    return EnsembleSpec(two, None, base, seq)


class TestMoments:
    def test_reference_weights(self, unit, sym):
        m = moments(BaseMeasure.lebesgue(unit, 0), 8)
        assert np.allclose(m, 1.0 / (np.arange(9) + 1), atol=1e-6)
        ms = moments(BaseMeasure.lebesgue(sym, 0), 9)
        assert np.max(np.abs(ms[1::2])) < 1e-12
        mx = moments(BaseMeasure.power(unit, 0, 1), 8)
        assert np.allclose(mx, 1.0 / (np.arange(9) + 2), atol=1e-5)

    def test_recentering(self, sym):
        m = moments(BaseMeasure.lebesgue(sym, 0), 4, center=1.0, scale=2.0)
        k = np.arange(5)
        exact = 2.0 * (-1.0) ** k / (k + 1)
        assert np.allclose(m, exact, atol=1e-6)


class TestSolve:
    def test_first_polynomials_match_closed_forms(self, unit_spec, sym_spec, pair_spec):
        p1 = solve_mop(unit_spec, MultiIndex((1,)))
        assert p1.degree == 1
        assert np.allclose(p1.coefficients, [-0.5], atol=1e-6)
        assert p1(2.0) == pytest.approx(1.5)
        p2 = solve_mop(sym_spec, MultiIndex((2,)))
        assert np.allclose(p2.coefficients, [-1.0 / 3.0, 0.0], atol=1e-6)
        p11 = solve_mop(pair_spec, MultiIndex((1, 1)))
        assert np.allclose(p11.coefficients, [-7.0 / 3.0, 0.0], atol=1e-6)
        root = np.sqrt(7.0 / 3.0)
        assert np.allclose(
            p11.real_roots(pair_spec.system), [-root, root], atol=1e-6
        )

    def test_matches_monic_legendre_recurrence(self, sym_spec):
        polys = [np.array([1.0]), np.array([0.0, 1.0])]
        for k in range(1, 6):
            lifted = np.concatenate(([0.0], polys[k]))
            prev = np.zeros(k + 2)
            prev[:k] = polys[k - 1] * (k * k / (4.0 * k * k - 1.0))
            polys.append(lifted - prev)
        for n in range(1, 7):
            pn = solve_mop(sym_spec, MultiIndex((n,)))
            full = np.concatenate((pn.coefficients, [1.0]))
            assert np.allclose(full, polys[n], atol=1e-4)

    def test_orthogonality_conditions(self, pair_spec):
        poly = solve_mop(pair_spec, MultiIndex((1, 1)))
        for i in range(2):
            nodes, h, values = pair_spec.base[i].refined(8)
            resid = float(np.sum(poly(nodes) * values) * h)
            assert abs(resid) < 1e-6

    def test_ill_conditioned_moment_matrix(self, unit_spec):
        solve_mop(unit_spec, MultiIndex((16,)))
        with pytest.raises(IllConditionedSystem) as exc:
            solve_mop(unit_spec, MultiIndex((18,)))
        assert exc.value.condition > CONDITION_GUARD


class TestExpectationIdentity:
    def test_by_quadrature(self, unit_spec):
        rows = expectation_identity_check(unit_spec, 2, (0.0, 0.5, 2.0))
        assert len(rows) == 3
        for z, p_z, estimate, stderr in rows:
            assert estimate == pytest.approx(p_z, abs=1e-8)
            assert stderr == 0.0

    def test_by_sampling(self, unit_spec):
        rows = expectation_identity_check(unit_spec, 5, (2.0,), samples=150, seed=3)
        z, p_z, estimate, stderr = rows[0]
        assert stderr > 0.0
        assert abs(estimate - p_z) < 3.0 * stderr

    def test_auto_mode_switches_with_size(self, unit_spec):
        small = expectation_identity_check(
            unit_spec, 4, (2.0,), mode="auto", samples=50, seed=0
        )
        big = expectation_identity_check(
            unit_spec, 5, (2.0,), mode="auto", samples=50, seed=0
        )
        assert small[0][3] == 0.0
        assert big[0][3] > 0.0


class TestMonicPolynomial:
    def test_evaluation_and_roots(self, sym):
        poly = MonicPolynomial(2, np.array([-0.25, 0.0]))
        assert np.allclose(poly(np.array([0.0, 1.0])), [-0.25, 0.75])
        assert np.allclose(poly.real_roots(sym), [-0.5, 0.5], atol=1e-6)
        outside = MonicPolynomial(2, np.array([-4.0, 0.0])).real_roots(sym)
        assert outside.size == 0


def test_export_polynomial_csv(tmp_path, pair_spec):
    poly = solve_mop(pair_spec, MultiIndex((1, 1)))
    path = tmp_path / "poly.csv"
    export_csv(poly, str(path))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["power", "coefficient"]
    assert rows[-1] == ["2", "1"]
    assert len(rows) == 4
    assert float(rows[1][1]) == pytest.approx(-7.0 / 3.0, abs=1e-6)
