"""Layer scalar products induced by minimal-norm bracket preimages.

Each layer i >= 2 inherits a scalar product from the canonical tensor-power
product on layer 1 through the surjection u |-> [u_1, ..., u_i]: the norm of
v is the least tensor norm over preimages.  With M_i the matrix of the
surjection over the elementary-tensor basis, the Gram matrix is
(M_i M_i^T)^{-1}, computed exactly over the rationals.  The resulting
left-invariant volume density (value 1 on the orthonormal frame) is what all
volume and covolume evaluations use.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import (
    LayerOutOfRange,
    NonpositiveRadius,
    NotBracketGenerating,
    SingularBasis,
)
from .graded_algebra import GradedAlgebra, GVec
from .ratlinalg import (
    cholesky_lower,
    identity,
    mat_det,
    mat_inv,
    mat_mul,
    mat_vec,
    transpose,
)
from .scalars import as_float, is_zero_scalar


class TensorCoeffs:
    """Coefficients over the lex-ordered elementary tensor basis of V_1^(x)i."""

    __slots__ = ("layer", "coeffs")

    def __init__(self, layer: int, coeffs):
        self.layer = layer
        self.coeffs = tuple(coeffs)

    def norm(self) -> float:
        return math.sqrt(
            max(0.0, as_float(sum(c * c for c in self.coeffs)))
        )

    def __repr__(self):
        return f"TensorCoeffs(layer={self.layer}, {self.coeffs})"


class PoppMetric:
    """Per-layer Gram matrices and minimal-preimage solvers for an algebra."""

    def __init__(self, algebra: GradedAlgebra):
        self.algebra = algebra
        self.bracket_matrices: dict = {}
        self.grams: dict = {1: identity(algebra.dims[0])}
        self.preimage_maps: dict = {}
        for layer in range(2, algebra.step + 1):
            m = algebra.tensor_bracket_matrix(layer)
            gram_inv = mat_mul(m, transpose(m))  # inverse Gram, d_i x d_i
            try:
                gram = mat_inv(gram_inv)
            except ZeroDivisionError as exc:
                raise NotBracketGenerating(
                    f"layer {layer}: bracket map is not surjective"
                ) from exc
            self.bracket_matrices[layer] = m
            self.grams[layer] = gram
            self.preimage_maps[layer] = mat_mul(transpose(m), gram)
        self.frame_factors = {
            layer: cholesky_lower(g) for layer, g in self.grams.items()
        }
        self.gram_dets = {
            layer: mat_det(g) for layer, g in self.grams.items()
        }

    # -- norms ------------------------------------------------------------------

    def layer_quadform(self, layer: int, coords):
        """Exact value of <v, v>_layer for exact coordinates."""
        g = self._gram(layer)
        total = Fraction(0)
        items = [
            (i, c) for i, c in enumerate(coords) if not is_zero_scalar(c)
        ]
        for i, ci in items:
            for j, cj in items:
                coeff = g[i][j]
                if coeff:
                    total = total + coeff * (ci * cj)
        return total

    def layer_norm(self, layer: int, coords) -> float:
        """Norm sqrt(v^T G_layer v); accepts exact or float coordinates."""
        return math.sqrt(max(0.0, as_float(self.layer_quadform(layer, coords))))

    def vector_norm(self, v: GVec) -> float:
        """Norm for the direct-sum scalar product over all layers."""
        return math.sqrt(
            math.fsum(
                self.layer_norm(l, v.layer(l)) ** 2
                for l in range(1, self.algebra.step + 1)
            )
        )

    def _gram(self, layer: int):
        if layer not in self.grams:
            raise LayerOutOfRange(
                f"layer {layer} outside 1..{self.algebra.step}"
            )
        return self.grams[layer]

    # -- minimal preimages --------------------------------------------------------

    def minimal_preimage(self, layer: int, coords) -> TensorCoeffs:
        """Least-tensor-norm u with [u] = v, via the normal equations."""
        if not 2 <= layer <= self.algebra.step:
            raise LayerOutOfRange(
                f"minimal preimage needs layer in 2..{self.algebra.step}"
            )
        u = mat_vec(self.preimage_maps[layer], list(coords))
        return TensorCoeffs(layer, u)

    # -- volumes --------------------------------------------------------------------

    def box_volume(self, radii) -> float:
        """Volume of the product of per-layer balls with the given radii."""
        frac, pi_exp = self.box_volume_parts(radii)
        return float(frac) * math.pi ** pi_exp

    def box_volume_parts(self, radii) -> tuple[Fraction, int]:
        """Exact (rational factor, power of pi) of the box volume."""
        radii = list(radii)
        if len(radii) != self.algebra.step:
            raise NonpositiveRadius(
                f"need {self.algebra.step} radii, got {len(radii)}"
            )
        frac = Fraction(1)
        pi_exp = 0
        for d, r in zip(self.algebra.dims, radii):
            r = Fraction(r)
            if r <= 0:
                raise NonpositiveRadius(f"radius {r} is not positive")
            bf, bp = ball_volume_parts(d)
            frac *= r ** d * bf
            pi_exp += bp
        return frac, pi_exp

    def frame_density(self) -> float:
        """Volume of the coordinate unit cube in the induced metric.

        Equals prod_i sqrt(det G_i): the density of the volume form against
        Lebesgue measure in the declared graded coordinates.
        """
        return math.sqrt(float(math.prod(self.gram_dets.values())))

    def covolume(self, basis) -> float:
        """|det| of the basis in the orthonormal frame of the volume form."""
        basis = list(basis)
        n = self.algebra.dim
        if len(basis) != n:
            raise SingularBasis(f"need {n} basis vectors, got {len(basis)}")
        if all(v.exact for v in basis):
            rows = [[Fraction(c) for c in v.coords()] for v in basis]
            det = mat_det(tuple(tuple(r) for r in rows))
            if det == 0:
                raise SingularBasis("basis vectors are linearly dependent")
            return abs(float(det)) * self.frame_density()
        det = _float_det([[as_float(c) for c in v.coords()] for v in basis])
        if det == 0.0:
            raise SingularBasis("basis vectors are linearly dependent")
        return abs(det) * self.frame_density()

    def orthonormal_frame(self) -> dict:
        """Per-layer float matrices mapping declared to orthonormal coords."""
        return {
            layer: [list(row) for row in zip(*fac)]
            for layer, fac in self.frame_factors.items()
        }


def _float_det(rows: list[list[float]]) -> float:
    n = len(rows)
    det = 1.0
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(rows[r][col]))
        if rows[pivot][col] == 0.0:
            return 0.0
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        for r in range(col + 1, n):
            f = rows[r][col] / rows[col][col]
            rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return det


@lru_cache(maxsize=None)
def ball_volume_parts(d: int) -> tuple[Fraction, int]:
    """Euclidean unit-ball volume as (rational, power of pi), exact for d <= 20."""
    if d < 0:
        raise NonpositiveRadius("dimension must be nonnegative")
    if d <= 20:
        frac, pi_exp = Fraction(1), 0
        if d % 2:
            frac = Fraction(2)
        for m in range(2 + (d % 2), d + 1, 2):
            frac *= Fraction(2, m)
            pi_exp += 1
        return frac, pi_exp
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return Fraction(vol), 0


def ball_volume(d: int) -> float:
    frac, pi_exp = ball_volume_parts(d)
    return float(frac) * math.pi ** pi_exp


def build_popp(algebra: GradedAlgebra) -> PoppMetric:
    """Construct the induced scalar products and volume data for an algebra."""
    return PoppMetric(algebra)
