import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import voterlim as vl
from voterlim.kernels import Partition, overlap_matrix

from _oracles import brute_step_l2, frac_overlap
from conftest import random_step_kernel


class TestPartition:
    def test_uniform_boundaries_are_exact_fractions(self):
        p = Partition.uniform(300)
        assert p.boundaries[50] == 50 / 300
        assert p.boundaries[50] == 1 / 6
        assert p.boundaries[100] == 1 / 3

    def test_cell_of_convention(self):
        # cells are (b[i-1], b[i]]; 0 belongs to the first cell
        p = Partition([0.0, 0.25, 0.5, 1.0])
        x = np.array([0.0, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0])
        assert list(p.cell_of(x)) == [0, 0, 0, 1, 1, 2, 2]

    def test_measures_sum_to_one(self):
        p = Partition([0.0, 0.2, 0.7, 1.0])
        assert p.measures == pytest.approx([0.2, 0.5, 0.3])
        assert p.measures.sum() == pytest.approx(1.0)

    def test_refined_with_merges_boundaries(self):
        a = Partition([0.0, 0.5, 1.0])
        b = Partition([0.0, 0.25, 1.0])
        m = a.refined_with(b)
        assert list(m.boundaries) == [0.0, 0.25, 0.5, 1.0]

    def test_rejects_bad_boundaries(self):
        with pytest.raises(vl.ValidationError):
            Partition([0.0, 0.5, 0.5, 1.0])
        with pytest.raises(vl.ValidationError):
            Partition([0.1, 1.0])
        with pytest.raises(vl.ValidationError):
            Partition([0.0, 0.9])


def test_overlap_matrix_against_rational_arithmetic(rng):
    for _ in range(5):
        ka = random_step_kernel(rng)
        kb = random_step_kernel(rng)
        got = overlap_matrix(ka.partition, kb.partition)
        want = frac_overlap(ka.partition.boundaries, kb.partition.boundaries)
        want = np.array([[float(x) for x in row] for row in want])
        assert np.abs(got - want).max() <= 1e-15


def test_overlap_matrix_marginals():
    a = Partition([0.0, 0.3, 1.0])
    b = Partition.uniform(7)
    m = overlap_matrix(a, b)
    assert m.sum(axis=1) == pytest.approx(a.measures, abs=1e-15)
    assert m.sum(axis=0) == pytest.approx(b.measures, abs=1e-15)


class TestStepKernel:
    def test_validation(self):
        with pytest.raises(vl.ValidationError):
            vl.StepKernel([0, 0.5, 1], [[1, 0.5], [0.2, 1]])  # not symmetric
        with pytest.raises(vl.ValidationError):
            vl.StepKernel([0, 0.5, 1], [[2, 0], [0, 1]])  # out of range
        with pytest.raises(vl.ValidationError):
            vl.StepKernel([0, 0.5, 1], [[np.nan, 0], [0, 1]])
        with pytest.raises(vl.ValidationError):
            vl.StepKernel([0, 1], [[0.5, 0.5]])  # shape mismatch

    def test_evaluate_uses_cell_lookup(self):
        k = vl.StepKernel([0, 0.25, 1], [[1.0, -0.5], [-0.5, 0.25]])
        assert k.evaluate(0.1, 0.1) == 1.0
        assert k.evaluate(0.25, 0.25) == 1.0  # right-closed cells
        assert k.evaluate(0.3, 0.1) == -0.5
        assert k.evaluate(1.0, 1.0) == 0.25

    def test_degree_is_row_average(self):
        k = vl.StepKernel([0, 0.25, 1], [[1.0, -0.5], [-0.5, 0.25]])
        # d(x) for x in the first cell: 0.25*1 + 0.75*(-0.5)
        assert k.degree(0.1) == pytest.approx(-0.125, abs=1e-15)
        assert k.degree(0.9) == pytest.approx(0.25 * (-0.5) + 0.75 * 0.25, abs=1e-15)

    def test_value_range_and_graphon_flag(self):
        k = vl.StepKernel([0, 0.5, 1], [[0.2, 0.8], [0.8, 1.0]])
        assert k.value_range() == (0.2, 1.0)
        assert k.is_graphon()
        assert not vl.BipartiteKernel(0.3).is_graphon()


class TestClosedFormFamilies:
    def test_constant(self):
        k = vl.ConstantKernel(-0.5)
        assert k.evaluate(0.3, 0.9) == -0.5
        assert k.degree(0.2) == -0.5
        with pytest.raises(vl.ValidationError):
            vl.ConstantKernel(1.5)

    def test_bipartite_step_form(self):
        k = vl.BipartiteKernel(0.25).as_step()
        assert list(k.partition.boundaries) == [0.0, 0.25, 1.0]
        assert k.values.tolist() == [[-1.0, 1.0], [1.0, 1.0]]

    def test_bipartite_degree(self):
        """d(x) = 1 - 2r on the first block and 1 on the second."""
        r = 0.3
        k = vl.BipartiteKernel(r)
        assert k.degree(0.1) == pytest.approx(1 - 2 * r, abs=1e-15)
        assert k.degree(0.9) == pytest.approx(1.0, abs=1e-15)

    def test_bipartite_requires_r_below_half(self):
        for bad in (0.0, 0.5, 0.7, -0.1):
            with pytest.raises(vl.ValidationError):
                vl.BipartiteKernel(bad)

    def test_product_is_outer_product(self):
        k = vl.ProductKernel([0, 0.25, 0.5, 1], [0.8, -0.4, 0.2])
        s = k.as_step()
        f = np.array([0.8, -0.4, 0.2])
        assert np.abs(s.values - np.outer(f, f)).max() == 0.0
        # degree factorizes: d(x) = f(x) * integral of f
        int_f = 0.25 * 0.8 + 0.25 * (-0.4) + 0.5 * 0.2
        assert k.degree(0.1) == pytest.approx(0.8 * int_f, abs=1e-15)

    def test_ws_mix_values(self):
        # rewiring blend (1-2p)*v + p: 0.8 on the blocks, 0.2 across
        base = vl.StepKernel([0, 0.5, 1], [[1.0, 0.0], [0.0, 1.0]])
        k = vl.WattsStrogatzKernel(base, 0.2)
        assert k.evaluate(0.1, 0.1) == pytest.approx(0.8)
        assert k.evaluate(0.1, 0.9) == pytest.approx(0.2)
        assert k.degree(0.1) == pytest.approx(0.6 * 0.5 + 0.2, abs=1e-15)
        assert k.is_graphon()

    def test_ws_mix_requires_graphon_base(self):
        with pytest.raises(vl.ValidationError):
            vl.WattsStrogatzKernel(vl.BipartiteKernel(0.3), 0.1)
        with pytest.raises(vl.ValidationError):
            vl.WattsStrogatzKernel(vl.ConstantKernel(1.0), 0.6)

    def test_direct_sum_blocks(self):
        k = vl.direct_sum(
            [(0.5, vl.ConstantKernel(1.0)), (0.5, vl.ConstantKernel(0.5))]
        )
        assert k.evaluate(0.2, 0.3) == 1.0
        assert k.evaluate(0.7, 0.9) == 0.5
        assert k.evaluate(0.2, 0.7) == 0.0  # cross-block is zero
        with pytest.raises(vl.ValidationError):
            vl.direct_sum([(0.4, vl.ConstantKernel(1.0)), (0.5, vl.ConstantKernel(1.0))])

    def test_direct_sum_inner_coordinates(self):
        inner = vl.StepKernel([0, 0.5, 1], [[1.0, 0.0], [0.0, 1.0]])
        k = vl.direct_sum([(0.25, inner), (0.75, vl.ConstantKernel(0.0))])
        # inner cell split at 0.5 maps to the global point 0.125
        assert k.evaluate(0.1, 0.1) == 1.0
        assert k.evaluate(0.1, 0.2) == 0.0
        s = k.as_step()
        assert 0.125 in list(s.partition.boundaries)


def test_scale_kernel():
    k = vl.scale_kernel(vl.ConstantKernel(0.5), 0.5)
    assert k.evaluate(0.1, 0.9) == 0.25
    with pytest.raises(vl.ValidationError):
        vl.scale_kernel(vl.ConstantKernel(0.8), 2.0)


class TestL2Distance:
    def test_same_kernel_built_two_ways_is_exactly_zero(self):
        a = vl.BipartiteKernel(0.25)
        b = vl.StepKernel([0, 0.25, 1], [[-1, 1], [1, 1]])
        assert vl.l2_distance(a, b) == 0.0

    def test_hand_value(self):
        # kernels differ by 1 on a 0.5 x 0.5 square twice: sqrt(2*0.25)
        a = vl.StepKernel([0, 0.5, 1], [[1, 0], [0, 0]])
        b = vl.StepKernel([0, 0.5, 1], [[0, 1], [1, 0]])
        want = np.sqrt(0.25 + 2 * 0.25)
        assert vl.l2_distance(a, b) == pytest.approx(want, abs=1e-15)

    def test_against_rational_grid(self, rng):
        for _ in range(5):
            a = random_step_kernel(rng, max_cells=4)
            b = random_step_kernel(rng, max_cells=4)
            got = vl.l2_distance(a, b)
            merged = a.partition.refined_with(b.partition)
            mids = merged.midpoints()
            ia = a.partition.cell_of(mids)
            ib = b.partition.cell_of(mids)
            diff2 = (a.values[np.ix_(ia, ia)] - b.values[np.ix_(ib, ib)]) ** 2
            want = np.sqrt(merged.measures @ diff2 @ merged.measures)
            assert got == pytest.approx(want, abs=1e-13)

    def test_fallback_quadrature_for_opaque_kernels(self):
        class Smooth(vl.Kernel):
            def evaluate(self, x, y):
                return np.asarray(x) * np.asarray(y) * 0.0 + 0.5

            def degree(self, x):
                return np.asarray(x) * 0.0 + 0.5

            def value_range(self):
                return (0.5, 0.5)

            def is_graphon(self):
                return True

            def spec(self):
                return {"type": "opaque"}

        d = vl.l2_distance(Smooth(), vl.ConstantKernel(0.0), resolution=64)
        assert d == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_l2_distance_is_a_pseudometric(seed):
    r = np.random.default_rng(seed)
    ks = [random_step_kernel(r, max_cells=4) for _ in range(3)]
    dab = vl.l2_distance(ks[0], ks[1])
    dba = vl.l2_distance(ks[1], ks[0])
    assert dab == pytest.approx(dba, abs=1e-13)
    dac = vl.l2_distance(ks[0], ks[2])
    dcb = vl.l2_distance(ks[2], ks[1])
    assert dab <= dac + dcb + 1e-12
    assert vl.l2_distance(ks[0], ks[0]) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_l2_distance_matches_fraction_oracle(seed):
    r = np.random.default_rng(seed)
    a = random_step_kernel(r, max_cells=3)
    b = random_step_kernel(r, max_cells=3)
    # compare the induced one-dimensional slices row by row instead of the
    # full square to keep the rational oracle cheap
    ga = vl.InitialCondition(a.partition.boundaries, a.values[0].clip(-1, 1))
    gb = vl.InitialCondition(b.partition.boundaries, b.values[0].clip(-1, 1))
    got = vl.step_l2_distance(
        ga.partition, ga.values, gb.partition, gb.values
    )
    want = brute_step_l2(
        ga.partition.boundaries, ga.values, gb.partition.boundaries, gb.values
    )
    assert got == pytest.approx(want, abs=1e-12)


class TestMakeKernel:
    @pytest.mark.parametrize(
        "spec",
        [
            {"type": "constant", "c": 0.5},
            {"type": "bipartite", "r": 0.25},
            {"type": "step", "boundaries": [0, 0.5, 1], "values": [[1, 0], [0, 1]]},
            {"type": "product", "boundaries": [0, 0.5, 1], "f": [0.5, -0.5]},
            {
                "type": "direct_sum",
                "parts": [
                    {"weight": 0.5, "kernel": {"type": "constant", "c": 1.0}},
                    {"weight": 0.5, "kernel": {"type": "constant", "c": 0.0}},
                ],
            },
            {"type": "ws_mix", "p": 0.1, "base": {"type": "constant", "c": 1.0}},
        ],
    )
    def test_spec_round_trip(self, spec):
        k = vl.make_kernel(spec)
        again = vl.make_kernel(k.spec())
        assert vl.l2_distance(k, again) == 0.0

    def test_unknown_type(self):
        with pytest.raises(vl.ValidationError):
            vl.make_kernel({"type": "mystery"})
        with pytest.raises(vl.ValidationError):
            vl.make_kernel({"type": "constant"})
        with pytest.raises(vl.ValidationError):
            vl.make_kernel("constant")
