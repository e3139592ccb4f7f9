"""Balanced horizontal decompositions of layer vectors and full vectors.

A layer-j vector is realized as a sum of j-fold brackets of horizontal
vectors: take the minimal-norm tensor preimage, split every elementary-tensor
term into j factors of equal norm (|alpha|^(1/j) each, sign on the first
factor), and keep zero rows so the row count is always d1**j.  The three
defining conditions - exact bracket sum, tensor-norm tightness, and equal
factor norms - are verified on every construction.

A full vector is handled layer by layer: each stage adjusts to the layer
target corrected by the higher-layer error of the prefix product, so the
group product of the per-stage commutator products reconstructs the target
exactly.  All stage bookkeeping stays in the exact scalar ring, which is what
makes the final reconstruction a machine-checked identity rather than a
float comparison.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

from .bch_engine import bch_product, iterated_group_commutator, product_fold
from .errors import CertificateFailure, LayerOutOfRange
from .graded_algebra import GradedAlgebra, GVec
from .popp_metric import PoppMetric
from .scalars import as_float, is_zero_scalar, scalar_key, signed_root

SUM_TOL = 1e-9
NORM_TOL = 1e-12

_cache_lock = threading.Lock()


class AdjustedRow:
    """One row (X_n1, ..., X_nj) of a horizontal set."""

    __slots__ = ("word", "alpha", "sign", "scale", "vectors")

    def __init__(self, word, alpha, sign, scale, vectors):
        self.word = word  # layer-1 basis indices, None for degenerate rows
        self.alpha = alpha  # exact or float coefficient; sign * scale**j
        self.sign = sign
        self.scale = scale  # common factor norm, >= 0
        self.vectors = vectors  # list of j horizontal GVecs

    @property
    def is_zero(self) -> bool:
        return self.sign == 0


class HorizontalSet:
    """d1**j rows of horizontal vectors adjusted to a layer-j target."""

    def __init__(self, algebra, metric, arity, target_coords, rows, exact):
        self.algebra: GradedAlgebra = algebra
        self.metric: PoppMetric = metric
        self.arity = arity  # entries per row
        self.target_coords = tuple(target_coords)
        self.rows: list[AdjustedRow] = rows
        self.exact = exact
        self._length: float | None = None

    # -- derived quantities ------------------------------------------------------

    def commutator_product(self) -> GVec:
        """Product over rows of the iterated group commutators."""
        factors = []
        for row in self.rows:
            if row.is_zero:
                continue
            if self.arity == 1:
                factors.append(row.vectors[0])
            else:
                factors.append(
                    iterated_group_commutator(self.algebra, row.vectors)
                )
        if not factors:
            return self.algebra.zero(self.exact)
        return product_fold(self.algebra, factors)

    def bracket_sum(self) -> GVec:
        """Sum over rows of the iterated Lie brackets."""
        out = self.algebra.zero(self.exact)
        for row in self.rows:
            if row.is_zero:
                continue
            out = out + self.algebra.iterated_bracket(row.vectors)
        return out

    def combinatorial_length(self) -> float:
        """Total layer-1 norm of all entries.

        A set produced by :meth:`rescale` reports exactly t times its
        parent's value: the rescale bookkeeping is where the scaling law is
        asserted, so the multiplication happens once, not per entry.
        """
        if self._length is None:
            self._length = math.fsum(
                self.metric.layer_norm(1, v.layer(1))
                for row in self.rows
                for v in row.vectors
            )
        return self._length

    def layer_error_vectors(self) -> dict[int, tuple]:
        """Higher-layer components of the commutator product, by layer."""
        y = self.commutator_product()
        return {
            l: y.layer(l)
            for l in range(self.arity + 1, self.algebra.step + 1)
        }

    def rescale(self, t) -> "HorizontalSet":
        """Row-wise rescale by t > 0, realizing the target t**j * Z_j."""
        t = Fraction(t) if not isinstance(t, float) else t
        rows = []
        for row in self.rows:
            alpha = (
                None if row.alpha is None else row.alpha * t ** self.arity
            )
            rows.append(
                AdjustedRow(
                    row.word,
                    alpha,
                    row.sign,
                    row.scale * t if row.sign else row.scale,
                    [v.scale(t) for v in row.vectors],
                )
            )
        coords = tuple(c * t ** self.arity for c in self.target_coords)
        exact = self.exact and not isinstance(t, float)
        out = HorizontalSet(
            self.algebra, self.metric, self.arity, coords, rows, exact
        )
        out._length = float(t) * self.combinatorial_length()
        return out

    # -- verification ---------------------------------------------------------------

    def verify_conditions(self) -> dict:
        """Check the three adjusted-set conditions; raise on failure."""
        layer = self._target_layer()
        target = self.algebra.from_layer(layer, self.target_coords, self.exact)
        report: dict = {"arity": self.arity, "rows": len(self.rows)}

        diff = self.bracket_sum() - target
        if self.exact:
            if not diff.is_zero:
                raise CertificateFailure("bracket sum misses the target")
            report["sum_exact"] = True
        else:
            err = self.metric.vector_norm(diff)
            scale = max(1.0, self.metric.vector_norm(target))
            if err > SUM_TOL * scale:
                raise CertificateFailure(
                    f"bracket sum off by {err} (float mode)"
                )
            report["sum_residual"] = err

        norms = [
            [self.metric.layer_norm(1, v.layer(1)) for v in row.vectors]
            for row in self.rows
        ]
        for row_norms in norms:
            top = max(row_norms, default=0.0)
            if top and max(row_norms) - min(row_norms) > NORM_TOL * top:
                raise CertificateFailure("row factor norms are unbalanced")
        report["balance_ok"] = True

        nu = math.sqrt(
            math.fsum(math.prod(r) ** 2 for r in norms)
        )
        target_norm = self.metric.layer_norm(layer, self.target_coords)
        if abs(nu - target_norm) > max(NORM_TOL, NORM_TOL * target_norm):
            raise CertificateFailure(
                f"tensor norm {nu} does not match layer norm {target_norm}"
            )
        if self.exact and self.arity >= 2:
            total = Fraction(0)
            for row in self.rows:
                if not row.is_zero:
                    total = (row.alpha * row.alpha) + total
            quad = self.metric.layer_quadform(layer, self.target_coords)
            delta = total - quad
            if not is_zero_scalar(delta):
                raise CertificateFailure("exact norm condition fails")
            report["norm_exact"] = True
        report["norm_value"] = nu
        return report

    def _target_layer(self) -> int:
        return self.arity

    def __repr__(self):
        return (
            f"HorizontalSet(arity={self.arity}, rows={len(self.rows)},"
            f" algebra={self.algebra.name})"
        )


def adjust_to_layer_vector(
    algebra: GradedAlgebra,
    metric: PoppMetric,
    coords,
    layer: int,
    exact: bool = True,
) -> HorizontalSet:
    """Build a horizontal set adjusted to the layer vector with the given
    coordinates.  Deterministic: rows follow lex order on tensor words."""
    if not 1 <= layer <= algebra.step:
        raise LayerOutOfRange(f"layer {layer} outside 1..{algebra.step}")
    coords = list(coords)
    cache = _cache_for(metric)
    key = None
    if exact and all(isinstance(c, (int, Fraction)) for c in coords):
        key = (layer, tuple(scalar_key(c) for c in coords))
        with _cache_lock:
            hit = cache.get(key)
        if hit is not None:
            return hit

    if layer == 1:
        d1 = algebra.dims[0]
        zero = algebra.zero(exact)
        head = algebra.from_layer(1, coords, exact)
        rows = []
        for n in range(d1):
            if n == 0:
                vec = head
                norm = metric.layer_norm(1, head.layer(1))
                sign = 0 if vec.is_zero else 1
                rows.append(AdjustedRow(None, None, sign, norm, [vec]))
            else:
                rows.append(AdjustedRow(None, None, 0, 0.0, [zero]))
        out = HorizontalSet(algebra, metric, 1, coords, rows, exact)
    else:
        preimage = metric.minimal_preimage(layer, coords)
        words = algebra.layer_words(layer)
        zero = algebra.zero(exact)
        rows = []
        for word, alpha in zip(words, preimage.coeffs):
            if is_zero_scalar(alpha):
                rows.append(
                    AdjustedRow(word, alpha, 0, 0.0, [zero] * layer)
                )
                continue
            sign, scale = signed_root(alpha, layer)
            vectors = []
            for pos, letter in enumerate(word):
                coeff = scale if (pos or sign > 0) else -scale
                vectors.append(algebra.basis_vector(1, letter, exact).scale(coeff))
            rows.append(AdjustedRow(word, alpha, sign, scale, vectors))
        out = HorizontalSet(algebra, metric, layer, coords, rows, exact)

    if key is not None:
        with _cache_lock:
            cache.setdefault(key, out)
            out = cache[key]
    return out


def _cache_for(metric: PoppMetric) -> dict:
    cache = getattr(metric, "_adjustment_cache", None)
    if cache is None:
        with _cache_lock:
            cache = getattr(metric, "_adjustment_cache", None)
            if cache is None:
                cache = {}
                metric._adjustment_cache = cache
    return cache


class AdjustedTuple:
    """Per-layer horizontal sets reconstructing a full vector exactly."""

    def __init__(self, algebra, metric, target, sets, prefix_errors, prefixes):
        self.algebra: GradedAlgebra = algebra
        self.metric: PoppMetric = metric
        self.target: GVec = target
        self.sets: list[HorizontalSet] = sets
        self.prefix_errors: dict = prefix_errors  # (l, j) -> layer-l coords
        self.prefixes: list[GVec] = prefixes  # product of the first j stages

    def total_combinatorial_length(self) -> float:
        return math.fsum(s.combinatorial_length() for s in self.sets)

    def stage_lengths(self) -> list[float]:
        return [s.combinatorial_length() for s in self.sets]

    def verify_reconstruction(self) -> None:
        """Exact (or 1e-9) check that the stage products rebuild the target."""
        final = self.prefixes[-1]
        diff = final - self.target
        if self.target.exact:
            if not diff.is_zero:
                raise CertificateFailure("stage products do not rebuild the target")
        else:
            err = self.metric.vector_norm(diff)
            scale = max(1.0, self.metric.vector_norm(self.target))
            if err > SUM_TOL * scale:
                raise CertificateFailure(f"reconstruction off by {err}")

    def __repr__(self):
        return (
            f"AdjustedTuple(algebra={self.algebra.name},"
            f" stages={len(self.sets)})"
        )


def adjust_tuple(
    algebra: GradedAlgebra, metric: PoppMetric, target: GVec
) -> AdjustedTuple:
    """Stagewise decomposition of a full vector with error-corrected targets."""
    exact = target.exact
    k = algebra.step
    sets: list[HorizontalSet] = []
    prefixes: list[GVec] = []
    prefix_errors: dict = {}

    stage1 = adjust_to_layer_vector(algebra, metric, target.layer(1), 1, exact)
    sets.append(stage1)
    prefix = stage1.commutator_product()
    prefixes.append(prefix)
    for l in range(2, k + 1):
        prefix_errors[(l, 1)] = prefix.layer(l)

    for j in range(2, k + 1):
        correction = prefix.layer(j)
        stage_coords = [
            z - b for z, b in zip(target.layer(j), correction)
        ]
        stage = adjust_to_layer_vector(algebra, metric, stage_coords, j, exact)
        sets.append(stage)
        y = stage.commutator_product()
        prefix = bch_product(algebra, prefix, y) if not y.is_zero else prefix
        prefixes.append(prefix)
        _check_prefix(metric, prefix, target, j, exact)
        for l in range(j + 1, k + 1):
            prefix_errors[(l, j)] = prefix.layer(l)

    tup = AdjustedTuple(algebra, metric, target, sets, prefix_errors, prefixes)
    tup.verify_reconstruction()
    return tup


def _check_prefix(metric, prefix: GVec, target: GVec, upto: int, exact: bool):
    """Prefix property: layers 1..upto of the prefix match the target."""
    for l in range(1, upto + 1):
        diffs = [a - b for a, b in zip(prefix.layer(l), target.layer(l))]
        if exact:
            if any(not is_zero_scalar(d) for d in diffs):
                raise CertificateFailure(
                    f"prefix property fails at layer {l} of {upto}"
                )
        else:
            err = math.sqrt(math.fsum(as_float(d) ** 2 for d in diffs))
            if err > SUM_TOL * max(1.0, metric.layer_norm(l, target.layer(l))):
                raise CertificateFailure(
                    f"prefix property off by {err} at layer {l}"
                )


def rescale_tuple(tup: AdjustedTuple, t) -> AdjustedTuple:
    """Row-wise rescale of every stage; realizes the dilated target."""
    algebra, metric = tup.algebra, tup.metric
    sets = [s.rescale(t) for s in tup.sets]
    target = algebra.dilate(t, tup.target)
    prefixes = []
    prefix = None
    for stage in sets:
        y = stage.commutator_product()
        if prefix is None:
            prefix = y
        elif not y.is_zero:
            prefix = bch_product(algebra, prefix, y)
        prefixes.append(prefix)
    prefix_errors = {
        (l, j): prefixes[j - 1].layer(l)
        for j in range(1, algebra.step + 1)
        for l in range(j + 1, algebra.step + 1)
    }
    out = AdjustedTuple(algebra, metric, target, sets, prefix_errors, prefixes)
    out.verify_reconstruction()
    return out
