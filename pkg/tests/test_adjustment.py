import math
from fractions import Fraction

import pytest

from carnotcert.adjustment import (
    adjust_to_layer_vector,
    adjust_tuple,
    rescale_tuple,
)
from carnotcert.errors import LayerOutOfRange
from carnotcert.scalars import as_float
from oracle_utils import rand_layer_coords, rand_vector

SQRT2 = math.sqrt(2.0)


def test_heisenberg_center_adjustment(heisenberg, heisenberg_metric):
    s = adjust_to_layer_vector(heisenberg, heisenberg_metric, [Fraction(1)], 2)
    assert len(s.rows) == 4
    live = [r for r in s.rows if not r.is_zero]
    assert [(r.word, r.alpha, r.sign) for r in live] == [
        ((0, 1), Fraction(1, 2), 1),
        ((1, 0), Fraction(-1, 2), -1),
    ]
    report = s.verify_conditions()
    assert report["sum_exact"] and report["norm_exact"] and report["balance_ok"]
    assert report["norm_value"] == pytest.approx(1 / SQRT2, abs=1e-14)
    assert s.combinatorial_length() == pytest.approx(2 * SQRT2, abs=1e-14)
    y = s.commutator_product()
    assert y == heisenberg.basis_vector(2, 0)
    assert s.bracket_sum() == heisenberg.basis_vector(2, 0)


def test_single_row_example(heisenberg, heisenberg_metric):
    # one row (X1, X2): the commutator product is X3, total entry norm 2
    s = adjust_to_layer_vector(heisenberg, heisenberg_metric, [Fraction(1)], 2)
    row = s.rows[1]
    vs = row.vectors
    assert len(vs) == 2
    # scaled entries both have norm (1/2)**0.5
    for v in vs:
        norm = heisenberg_metric.layer_norm(1, v.layer(1))
        assert norm == pytest.approx(math.sqrt(0.5), abs=1e-15)


def test_zero_target(heisenberg, heisenberg_metric):
    s = adjust_to_layer_vector(heisenberg, heisenberg_metric, [Fraction(0)], 2)
    assert all(r.is_zero for r in s.rows)
    assert s.combinatorial_length() == 0.0
    assert s.commutator_product().is_zero


def test_layer1_set(heisenberg, heisenberg_metric):
    s = adjust_to_layer_vector(
        heisenberg, heisenberg_metric, [Fraction(2), Fraction(-1)], 1
    )
    assert len(s.rows) == 2  # d1 rows, head plus zero padding
    assert s.rows[0].vectors[0] == heisenberg.vector([2, -1, 0])
    assert s.rows[1].is_zero
    assert s.combinatorial_length() == pytest.approx(math.sqrt(5), abs=1e-15)


def test_engel_top_layer(engel, engel_metric):
    s = adjust_to_layer_vector(engel, engel_metric, [Fraction(1)], 3)
    live = [r for r in s.rows if not r.is_zero]
    assert [(r.word, r.alpha, r.sign) for r in live] == [
        ((0, 0, 1), Fraction(1, 2), 1),
        ((0, 1, 0), Fraction(-1, 2), -1),
    ]
    for r in live:
        assert as_float(r.scale) == pytest.approx(0.5 ** (1 / 3), abs=1e-15)
    report = s.verify_conditions()
    assert report["sum_exact"]
    assert s.commutator_product() == engel.basis_vector(3, 0)


def test_out_of_range_layer(heisenberg, heisenberg_metric):
    with pytest.raises(LayerOutOfRange):
        adjust_to_layer_vector(heisenberg, heisenberg_metric, [Fraction(1)], 3)


def test_adjustment_cache(heisenberg, heisenberg_metric):
    a = adjust_to_layer_vector(heisenberg, heisenberg_metric, [Fraction(2, 3)], 2)
    b = adjust_to_layer_vector(heisenberg, heisenberg_metric, [Fraction(2, 3)], 2)
    assert a is b


def test_conditions_random_targets(
    heisenberg, heisenberg_metric, engel, engel_metric, rng
):
    for alg, metric in ((heisenberg, heisenberg_metric), (engel, engel_metric)):
        for layer in range(2, alg.step + 1):
            for _ in range(20):
                coords = rand_layer_coords(alg, rng, layer)
                s = adjust_to_layer_vector(alg, metric, coords, layer)
                report = s.verify_conditions()
                assert report["sum_exact"]


def test_two_step_error_vectors_vanish(heisenberg, heisenberg_metric, rng):
    for _ in range(20):
        coords = rand_layer_coords(heisenberg, rng, 2)
        s = adjust_to_layer_vector(heisenberg, heisenberg_metric, coords, 2)
        assert s.layer_error_vectors() == {}
        # commutator product coincides with the bracket sum in 2-step
        assert s.commutator_product() == s.bracket_sum()


def test_engel_error_vector_layers(engel, engel_metric, rng):
    for _ in range(10):
        coords = rand_layer_coords(engel, rng, 2)
        s = adjust_to_layer_vector(engel, engel_metric, coords, 2)
        errors = s.layer_error_vectors()
        assert set(errors) == {3}
        y = s.commutator_product()
        # the layer-2 part reproduces the target exactly
        diff = [a - b for a, b in zip(y.layer(2), coords)]
        assert all(
            d == 0 or (hasattr(d, "is_zero") and d.is_zero) for d in diff
        )
    s_top = adjust_to_layer_vector(engel, engel_metric, [Fraction(1)], 3)
    assert s_top.layer_error_vectors() == {}


def test_tuple_two_step_central(heisenberg, heisenberg_metric, rng):
    """In two steps the height-2 stage is exactly the target layer: no
    corrections, and the product is the plain sum."""
    for _ in range(10):
        z = rand_vector(heisenberg, rng)
        tup = adjust_tuple(heisenberg, heisenberg_metric, z)
        assert all(
            all(c == 0 for c in coords) if not hasattr(coords, "is_zero") else coords.is_zero
            for coords in [tup.prefix_errors[(2, 1)]]
        )
        assert tup.prefixes[-1] == z


def test_tuple_zero(heisenberg, heisenberg_metric):
    tup = adjust_tuple(heisenberg, heisenberg_metric, heisenberg.zero())
    assert tup.total_combinatorial_length() == 0.0
    assert all(s.commutator_product().is_zero for s in tup.sets)


def test_tuple_engel_top(engel, engel_metric):
    z = engel.vector([0, 0, 0, 1])
    tup = adjust_tuple(engel, engel_metric, z)
    assert tup.sets[0].combinatorial_length() == 0.0
    assert tup.sets[1].combinatorial_length() == 0.0
    assert tup.prefixes[-1] == z
    # correction entering stage 3 is zero here
    assert all(
        c == 0 or (hasattr(c, "is_zero") and c.is_zero)
        for c in tup.prefix_errors[(3, 2)]
    )


def test_tuple_random_reconstruction(engel, engel_metric, free23, free23_metric, rng):
    for alg, metric in ((engel, engel_metric), (free23, free23_metric)):
        for _ in range(10):
            z = rand_vector(alg, rng)
            tup = adjust_tuple(alg, metric, z)
            assert tup.prefixes[-1] == z  # exact, through the radical ring


def test_dcom_values(heisenberg, heisenberg_metric):
    z = heisenberg.vector([0, 0, 1])
    tup = adjust_tuple(heisenberg, heisenberg_metric, z)
    assert tup.total_combinatorial_length() == pytest.approx(
        2 * SQRT2, abs=1e-14
    )
    z2 = heisenberg.vector([3, 4, 1])
    tup2 = adjust_tuple(heisenberg, heisenberg_metric, z2)
    expected = 5.0 + tup2.sets[1].combinatorial_length()
    assert tup2.total_combinatorial_length() == pytest.approx(expected, abs=1e-12)


def test_rescale_set_exact_scaling(heisenberg, heisenberg_metric, rng):
    for t in (Fraction(2), Fraction(3), Fraction(1, 2)):
        coords = rand_layer_coords(heisenberg, rng, 2)
        s = adjust_to_layer_vector(heisenberg, heisenberg_metric, coords, 2)
        scaled = s.rescale(t)
        assert scaled.combinatorial_length() == float(t) * s.combinatorial_length()
        report = scaled.verify_conditions()
        assert report["sum_exact"]
        # realized target is the dilated one
        assert list(scaled.target_coords) == [c * t ** 2 for c in coords]


def test_rescale_tuple_matches_direct(engel, engel_metric, rng):
    """Row-rescaling realizes the dilated target; lengths agree with a fresh
    decomposition of the dilated vector to float accuracy."""
    z = rand_vector(engel, rng)
    tup = adjust_tuple(engel, engel_metric, z)
    for t in (Fraction(2), Fraction(1, 2)):
        scaled = rescale_tuple(tup, t)
        assert scaled.target == engel.dilate(t, z)
        assert scaled.total_combinatorial_length() == pytest.approx(
            float(t) * tup.total_combinatorial_length(), rel=1e-12
        )
        direct = adjust_tuple(engel, engel_metric, engel.dilate(t, z))
        assert direct.total_combinatorial_length() == pytest.approx(
            scaled.total_combinatorial_length(), rel=1e-9
        )


def test_float_mode(heisenberg, heisenberg_metric):
    s = adjust_to_layer_vector(heisenberg, heisenberg_metric, [0.75], 2, exact=False)
    report = s.verify_conditions()
    assert "sum_residual" in report and report["sum_residual"] < 1e-12
    z = heisenberg.vector([0.5, 0.25, 0.75], exact=False)
    tup = adjust_tuple(heisenberg, heisenberg_metric, z)
    assert tup.total_combinatorial_length() > 0
