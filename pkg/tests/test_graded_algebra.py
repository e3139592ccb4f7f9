import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carnotcert.errors import (
    AntisymmetryViolation,
    GradingViolation,
    JacobiViolation,
    LayerOutOfRange,
    NonpositiveScale,
    NotBracketGenerating,
    ParseError,
    UnknownFamily,
    UnsupportedParams,
)
from carnotcert.graded_algebra import (
    builtin_family,
    load_algebra,
    orthonormalize_layer1,
    witt_dimension,
)
from carnotcert.ratlinalg import mat_rank
from oracle_utils import rand_fraction, rand_vector

HEISENBERG_DOC = {
    "name": "h1",
    "dims": [2, 1],
    "brackets": [
        {
            "a": [1, 1],
            "b": [1, 2],
            "out": [{"layer": 2, "idx": 1, "coeff": "1"}],
        }
    ],
}


def test_load_heisenberg_doc():
    alg = load_algebra(json.dumps(HEISENBERG_DOC))
    assert alg.dims == (2, 1)
    x1, x2 = alg.basis_vector(1, 0), alg.basis_vector(1, 1)
    assert alg.bracket(x1, x2) == alg.basis_vector(2, 0)


def test_load_from_file(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps(HEISENBERG_DOC))
    alg = load_algebra(str(path))
    assert alg.name == "h1"


def test_antisymmetry_violation():
    doc = {
        "name": "bad",
        "dims": [2, 1],
        "brackets": [
            {"a": [1, 1], "b": [1, 2], "out": [{"layer": 2, "idx": 1, "coeff": "1"}]},
            {"a": [1, 2], "b": [1, 1], "out": [{"layer": 2, "idx": 1, "coeff": "1"}]},
        ],
    }
    with pytest.raises(AntisymmetryViolation):
        load_algebra(json.dumps(doc))


def test_not_bracket_generating_reports_layer():
    doc = {
        "name": "thin",
        "dims": [2, 2],
        "brackets": [
            {"a": [1, 1], "b": [1, 2], "out": [{"layer": 2, "idx": 1, "coeff": "1"}]}
        ],
    }
    with pytest.raises(NotBracketGenerating, match="layer 2"):
        load_algebra(json.dumps(doc))


def test_grading_violation():
    doc = {
        "name": "offgrade",
        "dims": [2, 1],
        "brackets": [
            {"a": [1, 1], "b": [1, 2], "out": [{"layer": 1, "idx": 1, "coeff": "1"}]}
        ],
    }
    with pytest.raises(GradingViolation):
        load_algebra(json.dumps(doc))


def test_jacobi_violation():
    # dims (3,1,1): [X1,X2]=X4, [X1,X4]=X5, [X3,X4]=X5 breaks Jacobi on
    # (X1, X2, X3): the cyclic sum equals [X3, X4] = X5 != 0.
    doc = {
        "name": "nonjacobi",
        "dims": [3, 1, 1],
        "brackets": [
            {"a": [1, 1], "b": [1, 2], "out": [{"layer": 2, "idx": 1, "coeff": "1"}]},
            {"a": [1, 1], "b": [2, 1], "out": [{"layer": 3, "idx": 1, "coeff": "1"}]},
            {"a": [1, 3], "b": [2, 1], "out": [{"layer": 3, "idx": 1, "coeff": "1"}]},
        ],
    }
    with pytest.raises(JacobiViolation):
        load_algebra(json.dumps(doc))


def test_parse_errors():
    with pytest.raises(ParseError):
        load_algebra("{not json")
    with pytest.raises(ParseError):
        load_algebra(json.dumps({"name": "x", "dims": [0]}))
    with pytest.raises(ParseError):
        load_algebra(
            json.dumps(
                {
                    "name": "x",
                    "dims": [2, 1],
                    "brackets": [
                        {
                            "a": [1, 1],
                            "b": [1, 2],
                            "out": [{"layer": 2, "idx": 1, "coeff": 0.5}],
                        }
                    ],
                }
            )
        )


def test_builtin_families(heisenberg, engel, h5, free23):
    assert heisenberg.dims == (2, 1)
    assert engel.dims == (2, 1, 1)
    assert h5.dims == (4, 1)
    assert free23.dims == (2, 1, 2)
    with pytest.raises(UnknownFamily):
        builtin_family("nilpotent_free")
    with pytest.raises(UnsupportedParams):
        builtin_family("free_nilpotent", (4, 7))
    with pytest.raises(UnsupportedParams):
        builtin_family("heisenberg", (0,))


def test_free_nilpotent_witt_dimensions():
    fn24 = builtin_family("free_nilpotent", (2, 4))
    assert fn24.dims == (2, 1, 2, 3)
    fn32 = builtin_family("free_nilpotent", (3, 2))
    assert fn32.dims == (3, 3)
    assert witt_dimension(2, 3) == 2
    assert witt_dimension(2, 6) == 9


def test_bracket_examples(heisenberg, engel):
    x1, x2 = heisenberg.basis_vector(1, 0), heisenberg.basis_vector(1, 1)
    assert heisenberg.bracket(x1, x2) == heisenberg.basis_vector(2, 0)
    # linearity across both defining constants: [X1, X2+X3] = X3 + X4
    e1 = engel.basis_vector(1, 0)
    z = engel.basis_vector(1, 1) + engel.basis_vector(2, 0)
    out = engel.bracket(e1, z)
    assert out == engel.basis_vector(2, 0) + engel.basis_vector(3, 0)
    # and [X1, X1+X3] keeps only the layer-3 part
    z2 = engel.basis_vector(1, 0) + engel.basis_vector(2, 0)
    assert engel.bracket(e1, z2) == engel.basis_vector(3, 0)


def test_bracket_antisymmetry_random(heisenberg, engel, free23, rng):
    for alg in (heisenberg, engel, free23):
        for _ in range(20):
            v = rand_vector(alg, rng)
            w = rand_vector(alg, rng)
            assert alg.bracket(v, v).is_zero
            assert (alg.bracket(v, w) + alg.bracket(w, v)).is_zero


def test_iterated_bracket(engel, heisenberg):
    e1, e2 = engel.basis_vector(1, 0), engel.basis_vector(1, 1)
    assert engel.iterated_bracket([e1, e1, e2]) == engel.basis_vector(3, 0)
    v = engel.vector([1, 2, 3, 4])
    assert engel.iterated_bracket([v]) == v
    x1, x2 = heisenberg.basis_vector(1, 0), heisenberg.basis_vector(1, 1)
    assert heisenberg.iterated_bracket([x1, x2, x2]).is_zero


def test_iterated_bracket_matches_fold(free23, rng):
    for _ in range(20):
        vs = [rand_vector(free23, rng) for _ in range(3)]
        manual = free23.bracket(vs[0], free23.bracket(vs[1], vs[2]))
        assert free23.iterated_bracket(vs) == manual


def test_dilation(heisenberg):
    v = heisenberg.vector([1, 0, 1])
    assert heisenberg.dilate(2, v) == heisenberg.vector([2, 0, 4])
    assert heisenberg.dilate(1, v) == v
    with pytest.raises(NonpositiveScale):
        heisenberg.dilate(0, v)
    with pytest.raises(NonpositiveScale):
        heisenberg.dilate(Fraction(-1, 2), v)


@settings(max_examples=40, deadline=None)
@given(
    s=st.fractions(min_value=Fraction(1, 8), max_value=8),
    t=st.fractions(min_value=Fraction(1, 8), max_value=8),
)
def test_dilation_group_law(s, t):
    alg = builtin_family("engel")
    v = alg.vector([2, -3, Fraction(1, 2), 5])
    assert alg.dilate(s, alg.dilate(t, v)) == alg.dilate(s * t, v)


def test_dilation_is_lie_map(engel, rng):
    for _ in range(20):
        t = rand_fraction(rng, denom=8, span=8)
        if t <= 0:
            continue
        u, v = rand_vector(engel, rng), rand_vector(engel, rng)
        lhs = engel.dilate(t, engel.bracket(u, v))
        rhs = engel.bracket(engel.dilate(t, u), engel.dilate(t, v))
        assert lhs == rhs


def test_project_layer(heisenberg, rng):
    v = heisenberg.vector([1, 0, 5])
    assert heisenberg.project_layer(v, 2) == (Fraction(5),)
    horizontal = heisenberg.vector([3, -2, 0])
    assert heisenberg.project_layer(horizontal, 1) == (Fraction(3), Fraction(-2))
    with pytest.raises(LayerOutOfRange):
        heisenberg.project_layer(v, 3)
    w = rand_vector(heisenberg, rng)
    rebuilt = sum(
        (
            heisenberg.from_layer(l, w.layer(l))
            for l in range(1, heisenberg.step + 1)
        ),
        heisenberg.zero(),
    )
    assert rebuilt == w


def test_bracket_generating_ranks(heisenberg, engel, h5, free23):
    for alg in (heisenberg, engel, h5, free23):
        for layer in range(2, alg.step + 1):
            assert mat_rank(alg.tensor_bracket_matrix(layer)) == alg.dims[layer - 1]


def test_orthonormalize_layer1(heisenberg):
    rescaled = orthonormalize_layer1(heisenberg, [[4, 0], [0, 9]])
    f1, f2 = rescaled.basis_vector(1, 0), rescaled.basis_vector(1, 1)
    out = rescaled.bracket(f1, f2)
    assert out == rescaled.basis_vector(2, 0).scale(Fraction(1, 6))
    with pytest.raises(UnsupportedParams):
        orthonormalize_layer1(heisenberg, [[2, 0], [0, 1]])
    with pytest.raises(UnsupportedParams):
        orthonormalize_layer1(heisenberg, [[-1, 0], [0, 1]])


def test_algebra_mismatch(heisenberg, engel):
    from carnotcert.errors import AlgebraMismatch
    from carnotcert.bch_engine import bch_product

    with pytest.raises(AlgebraMismatch):
        heisenberg.bracket(
            heisenberg.basis_vector(1, 0), engel.basis_vector(1, 0)
        )
    with pytest.raises(AlgebraMismatch):
        bch_product(
            heisenberg, heisenberg.basis_vector(1, 0), engel.basis_vector(1, 0)
        )


def test_inner1_in_document():
    doc = dict(HEISENBERG_DOC)
    doc["inner1"] = [["4", "0"], ["0", "4"]]
    alg = load_algebra(json.dumps(doc))
    f1, f2 = alg.basis_vector(1, 0), alg.basis_vector(1, 1)
    assert alg.bracket(f1, f2) == alg.basis_vector(2, 0).scale(Fraction(1, 4))
