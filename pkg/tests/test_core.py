import numpy as np
import pytest

from angelesco import (
    Configuration,
    GridMeasure,
    IntervalSystem,
    MultiIndex,
    MultiIndexSequence,
    VectorMeasure,
    apportion,
    counting_measure,
    quantile_configuration,
    sort_into_blocks,
    weak_star_distance,
)
from angelesco.core import DEFAULT_CELLS
from angelesco.errors import (
    AngelescoError,
    CoordinateOutsideSystem,
    DegenerateComponent,
    GridMismatch,
)
from conftest import arcsine_cdf


class TestIntervalSystem:
    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            IntervalSystem((), ())
        with pytest.raises(ValueError):
            IntervalSystem(((0.0, 1.0),), (0.5, 0.5))
        with pytest.raises(ValueError):
            IntervalSystem(((1.0, 1.0),), (1.0,))
        with pytest.raises(ValueError):
            IntervalSystem(((0.0, 2.0), (1.0, 3.0)), (0.5, 0.5))
        with pytest.raises(ValueError):
            IntervalSystem(((0.0, 1.0), (1.0, 2.0)), (0.5, 0.5))
        with pytest.raises(ValueError):
            IntervalSystem(((0.0, 1.0), (2.0, 3.0)), (1.5, -0.5))
        with pytest.raises(ValueError):
            IntervalSystem(((0.0, 1.0),), (0.9,))

    def test_grid_geometry(self, two):
        assert two.p == 2
        assert two.length(0) == 1.0
        h = two.cell_width(0, 10)
        assert h == pytest.approx(0.1)
        nodes = two.grid_nodes(0, 10)
        assert nodes.shape == (10,)
        assert nodes[0] == pytest.approx(-2.0 + h / 2)
        assert np.allclose(np.diff(nodes), h)
        edges = two.cell_edges(0, 10)
        assert edges.shape == (11,)
        assert edges[0] == -2.0 and edges[-1] == -1.0
        assert two.grid_nodes(0).size == DEFAULT_CELLS

    def test_contains_and_locate(self, two):
        assert two.contains(0, -1.5)
        assert two.contains(0, -2.0)
        assert not two.contains(0, 1.5)
        assert two.contains(1, 2.0 + 5e-13)
        assert np.all(two.contains(0, np.array([-2.0, -1.3, -1.0])))
        assert two.locate(-1.5) == 0
        assert two.locate(1.5) == 1
        assert two.locate(0.0) == -1


class TestGridMeasure:
    def test_uniform_weights_and_cdf(self, two):
        g = GridMeasure.uniform(two, 0, cells=50, mass=0.5)
        assert g.cells == 50
        assert np.allclose(g.weights, 0.01)
        cdf = g.cdf()
        assert cdf[-1] == pytest.approx(0.5)
        assert np.all(np.diff(cdf) >= 0)
        assert np.allclose(g.density(), 0.5)

    def test_from_density_integrates(self, unit):
        g = GridMeasure.from_density(unit, 0, lambda x: x * x)
        assert g.mass == pytest.approx(1.0 / 3.0, abs=1e-5)
        g1 = GridMeasure.from_density(unit, 0, lambda x: x * x, mass=1.0)
        assert g1.mass == pytest.approx(1.0)
        assert g1.weights.sum() == pytest.approx(1.0)

    def test_from_cdf_matches_at_cell_edges(self, sym):
        g = GridMeasure.from_cdf(sym, 0, arcsine_cdf)
        edges = sym.cell_edges(0, g.cells)
        assert np.allclose(g.cdf(), arcsine_cdf(edges[1:]), atol=1e-9)
        assert g.mass == pytest.approx(1.0)

    def test_rejects_inconsistent_data(self, unit):
        nodes = unit.grid_nodes(0, 4)
        h = unit.cell_width(0, 4)
        w = np.full(4, 0.25)
        with pytest.raises(ValueError):
            GridMeasure(unit, 0, nodes[::-1].copy(), h, w, 1.0)
        with pytest.raises(ValueError):
            GridMeasure(unit, 0, nodes, h, w, 2.0)
        with pytest.raises(ValueError):
            GridMeasure(unit, 0, nodes, h, w, -1.0)
        with pytest.raises(ValueError):
            GridMeasure(unit, 5, nodes, h, w, 1.0)
        with pytest.raises(ValueError):
            GridMeasure.from_density(unit, 0, lambda x: x - 2.0)

    def test_zero_mass_allowed_but_not_rescalable(self, unit):
        nodes = unit.grid_nodes(0, 4)
        g = GridMeasure(unit, 0, nodes, unit.cell_width(0, 4), np.zeros(4), 0.0)
        assert g.mass == 0.0
        with pytest.raises(ValueError):
            GridMeasure.from_density(unit, 0, lambda x: 0.0 * x, mass=1.0)

    def test_binned_counts_points(self, unit):
        pts = np.array([0.15, 0.15, 0.95])
        g = GridMeasure.binned(unit, 0, pts, 1.0 / 3.0, cells=10)
        assert g.mass == pytest.approx(1.0)
        assert g.weights[1] == pytest.approx(2.0 / 3.0)
        assert g.weights[9] == pytest.approx(1.0 / 3.0)
        with pytest.raises(CoordinateOutsideSystem):
            GridMeasure.binned(unit, 0, np.array([1.5]), 1.0, cells=10)

    def test_binned_draws_track_the_law(self, unit):
        rng = np.random.default_rng(0)
        pts = rng.random(1000)
        nu = VectorMeasure((GridMeasure.binned(unit, 0, pts, 1e-3),))
        assert weak_star_distance(nu, VectorMeasure.uniform(unit)) < 0.05


class TestVectorMeasure:
    def test_mass_budget(self, two):
        mu = VectorMeasure.uniform(two)
        assert mu.masses == pytest.approx((0.5, 0.5))
        assert len(list(mu)) == 2
        assert mu[1].interval_index == 1
        heavy = (
            GridMeasure.uniform(two, 0, mass=0.6),
            GridMeasure.uniform(two, 1, mass=0.6),
        )
        with pytest.raises(ValueError):
            VectorMeasure(heavy)
        with pytest.raises(ValueError):
            VectorMeasure((mu[0],))
        with pytest.raises(ValueError):
            VectorMeasure((mu[1], mu[0]))

    def test_from_densities(self, two):
        mu = VectorMeasure.from_densities(
            two,
            [lambda x: 1.0 + 0.0 * x, lambda x: 2.0 + 0.0 * x],
            masses=(0.5, 0.5),
        )
        assert mu.masses == pytest.approx((0.5, 0.5))
        assert np.allclose(mu[0].density(), 0.5)


class TestIndexing:
    def test_multi_index(self):
        m = MultiIndex((3, 2))
        assert m.p == 2
        assert m.total == 5
        with pytest.raises(ValueError):
            MultiIndex((3, 0))

    def test_apportion(self):
        assert apportion(7, (1.0 / 3.0, 2.0 / 3.0)).counts == (2, 5)
        for total in range(2, 40):
            counts = apportion(total, (0.5, 0.5)).counts
            assert sum(counts) == total
            assert max(counts) - min(counts) <= 1
        with pytest.raises(ValueError):
            apportion(1, (0.5, 0.5))

    def test_proportional_sequence(self, two):
        seq = MultiIndexSequence.proportional(two.r, start=2, step=2)
        assert seq(1).counts == (1, 1)
        assert seq(20).total == 40
        seq.check_limit(two.r, range(1, 30))
        with pytest.raises(ValueError):
            seq.check_limit((0.9, 0.1), range(1, 30))
        with pytest.raises(ValueError):
            seq(0)
        with pytest.raises(ValueError):
            MultiIndexSequence.proportional(two.r, start=1, step=1)

    def test_explicit_sequence(self):
        seq = MultiIndexSequence.explicit(((1, 1), (2, 1)))
        assert seq(2).counts == (2, 1)
        with pytest.raises(ValueError):
            seq(3)


class TestConfigurations:
    def test_blocks_are_validated(self, two):
        X = Configuration(two, (np.array([-1.8, -1.2]), np.array([1.5])))
        assert X.index.counts == (2, 1)
        assert X.total == 3
        assert np.allclose(X.flatten(), [-1.8, -1.2, 1.5])
        with pytest.raises(ValueError):
            Configuration(two, (np.array([-1.2, -1.8]), np.array([1.5])))
        with pytest.raises(CoordinateOutsideSystem):
            Configuration(two, (np.array([-1.8, 0.0]), np.array([1.5])))

    def test_sort_into_blocks(self, two):
        X = sort_into_blocks([1.5, -1.2, -1.8, 1.9], two, MultiIndex((2, 2)))
        assert np.allclose(X.blocks[0], [-1.8, -1.2])
        assert np.allclose(X.blocks[1], [1.5, 1.9])
        with pytest.raises(CoordinateOutsideSystem):
            sort_into_blocks([0.5, 1.5], two, MultiIndex((1, 1)))
        with pytest.raises(CoordinateOutsideSystem):
            sort_into_blocks([-1.5, -1.2], two, MultiIndex((1, 1)))
        with pytest.raises(CoordinateOutsideSystem):
            sort_into_blocks([-1.5], two, MultiIndex((1, 1)))

    def test_counting_measure_masses(self, two):
        X = sort_into_blocks([-1.9, -1.1, 1.4, 1.5, 1.6], two, MultiIndex((2, 3)))
        nu = counting_measure(X, cells=100)
        assert nu.masses == pytest.approx((0.5, 0.5))
        plain = counting_measure(X, cells=100, block_normalized=False)
        assert plain.masses == pytest.approx((0.4, 0.6))

    def test_quantiles_of_uniform_are_exact(self, unit):
        mu = VectorMeasure.uniform(unit)
        X = quantile_configuration(mu, MultiIndex((4,)))
        assert np.allclose(X.blocks[0], [0.125, 0.375, 0.625, 0.875], atol=1e-9)

    def test_quantiles_need_mass(self, two):
        full = GridMeasure.uniform(two, 0, mass=1.0)
        empty = GridMeasure(
            two, 1, two.grid_nodes(1), two.cell_width(1), np.zeros(400), 0.0
        )
        mu = VectorMeasure((full, empty))
        with pytest.raises(DegenerateComponent):
            quantile_configuration(mu, MultiIndex((1, 1)))

    def test_quantile_counting_converges(self, arcsine):
        prev = np.inf
        for n, cap in ((10, 0.08), (40, 0.02), (160, 0.006)):
            X = quantile_configuration(arcsine, MultiIndex((n,)))
            d = weak_star_distance(counting_measure(X), arcsine)
            assert d < cap
            assert d < prev
            prev = d


class TestWeakStarDistance:
    def test_basic_properties(self, two):
        mu = VectorMeasure.uniform(two)
        X = sort_into_blocks([-1.5, 1.5], two, MultiIndex((1, 1)))
        nu = counting_measure(X)
        assert weak_star_distance(mu, mu) == 0.0
        d = weak_star_distance(mu, nu)
        assert d > 0
        assert d == pytest.approx(weak_star_distance(nu, mu))

    def test_grid_mismatch(self, two, sym):
        mu = VectorMeasure.uniform(two)
        with pytest.raises(GridMismatch):
            weak_star_distance(mu, VectorMeasure.uniform(two, cells=200))
        with pytest.raises(GridMismatch):
            weak_star_distance(mu, VectorMeasure.uniform(sym))


def test_error_hierarchy():
    from angelesco import errors

    names = (
        "CoordinateOutsideSystem",
        "GridMismatch",
        "DegenerateComponent",
        "CoincidentNodesAcrossIntervals",
        "InfeasibleMasses",
        "MaxIterationsExceeded",
        "DegenerateConditional",
        "DimensionTooLarge",
        "IllConditionedSystem",
        "IllConditionedGram",
    )
    for name in names:
        assert issubclass(getattr(errors, name), AngelescoError)
    assert issubclass(AngelescoError, Exception)
