import math
from collections import Counter
from fractions import Fraction

import pytest

from carnotcert.adjustment import adjust_tuple, rescale_tuple
from carnotcert.certificates import cc_upper_bound
from carnotcert.path_synth import (
    cc_lower_bound,
    certified_dcc_upper,
    commutator_word,
    path_from_tuple,
)
from oracle_utils import rand_vector

SQRT2 = math.sqrt(2.0)


def test_commutator_word_patterns():
    assert commutator_word(1) == [(0, 1)]
    assert commutator_word(2) == [(0, 1), (1, 1), (0, -1), (1, -1)]
    w3 = commutator_word(3)
    assert len(w3) == 10
    counts = Counter(pos for pos, _ in w3)
    assert counts == {0: 2, 1: 4, 2: 4}
    # every position nets to zero displacement
    for pos in range(3):
        assert sum(sign for p, sign in w3 if p == pos) == 0


def test_commutator_word_counts_general():
    for arity in range(1, 6):
        counts = Counter(pos for pos, _ in commutator_word(arity))
        for pos in range(arity - 1):
            assert counts[pos] == 2 ** (pos + 1)
        assert counts[arity - 1] == 2 ** (arity - 1)


def test_single_horizontal_target(heisenberg, heisenberg_metric):
    path, bound = certified_dcc_upper(
        heisenberg, heisenberg_metric, heisenberg.vector([1, 0, 0])
    )
    assert bound == 1.0
    assert len(path.segments) == 1
    assert path.endpoint == heisenberg.vector([1, 0, 0])


def test_center_target(heisenberg, heisenberg_metric):
    z = heisenberg.vector([0, 0, 1])
    path, bound = certified_dcc_upper(heisenberg, heisenberg_metric, z)
    assert len(path.segments) == 8
    assert bound == pytest.approx(4 * SQRT2, abs=1e-12)
    assert path.endpoint == z  # exact, through the radical ring
    tup = adjust_tuple(heisenberg, heisenberg_metric, z)
    assert bound <= cc_upper_bound(2, tup.total_combinatorial_length()) + 1e-15


def test_zero_target(heisenberg, heisenberg_metric):
    path, bound = certified_dcc_upper(
        heisenberg, heisenberg_metric, heisenberg.zero()
    )
    assert bound == 0.0 and path.segments == []
    assert path.endpoint.is_zero


def test_random_targets_exact_endpoints(
    heisenberg, heisenberg_metric, engel, engel_metric, free23, free23_metric, rng
):
    for alg, metric in (
        (heisenberg, heisenberg_metric),
        (engel, engel_metric),
        (free23, free23_metric),
    ):
        for _ in range(10):
            z = rand_vector(alg, rng)
            path, bound = certified_dcc_upper(alg, metric, z)
            assert path.endpoint == z
            tup = adjust_tuple(alg, metric, z)
            ceiling = cc_upper_bound(alg.step, tup.total_combinatorial_length())
            assert bound <= ceiling * (1 + 1e-12)
            assert bound >= cc_lower_bound(metric, z) - 1e-9


def test_lower_bound_examples(heisenberg, heisenberg_metric):
    assert cc_lower_bound(heisenberg_metric, heisenberg.vector([0, 0, 1])) == 0.0
    assert cc_lower_bound(heisenberg_metric, heisenberg.vector([1, 0, 0])) == 1.0


def test_path_dilation_exact_length(heisenberg, heisenberg_metric):
    z = heisenberg.vector([0, 0, 1])
    tup = adjust_tuple(heisenberg, heisenberg_metric, z)
    path = path_from_tuple(tup)
    for t in (Fraction(2), Fraction(3), Fraction(1, 2)):
        dilated = path.dilate(t)
        assert dilated.length == float(t) * path.length  # bitwise
        assert dilated.endpoint == heisenberg.dilate(t, z)
        # the dilated path is the path of the row-rescaled decomposition
        scaled_tup = rescale_tuple(tup, t)
        scaled_path = path_from_tuple(scaled_tup)
        assert scaled_path.length == pytest.approx(dilated.length, rel=1e-12)


def test_waypoints(heisenberg, heisenberg_metric):
    z = heisenberg.vector([0, 0, 1])
    path, _ = certified_dcc_upper(heisenberg, heisenberg_metric, z)
    points = path.waypoints()
    assert len(points) == len(path.segments)
    final = points[-1]
    assert final.layer(2)[0] == pytest.approx(1.0, abs=1e-12)


def test_float_mode_paths(heisenberg, heisenberg_metric):
    z = heisenberg.vector([0.125, -0.25, 0.3], exact=False)
    path, bound = certified_dcc_upper(heisenberg, heisenberg_metric, z)
    err = heisenberg_metric.vector_norm(path.endpoint - z)
    assert err < 1e-9
    assert bound > 0
