"""Explicit horizontal paths certifying distance upper bounds.

A path is a word of one-parameter horizontal arcs: each segment X moves the
current point g to g * exp(X), costs exactly its layer-1 norm, and the whole
word's endpoint is the exact group product of the segments.  Commutator
words are expanded recursively ([x, C]_c = x C x^{-1} C^{-1}), zero-norm
letters are dropped, and the endpoint is recomputed through the group law,
so every emitted bound "distance <= length" is backed by a machine-checked
certificate rather than an estimate.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .adjustment import AdjustedTuple, adjust_tuple
from .bch_engine import product_fold
from .certificates import cc_upper_bound
from .errors import CertificateFailure
from .graded_algebra import GradedAlgebra, GVec
from .popp_metric import PoppMetric

ENDPOINT_TOL = 1e-9


class HorizontalPath:
    """Ordered horizontal segments with cached endpoint and length."""

    __slots__ = ("algebra", "metric", "segments", "length", "endpoint")

    def __init__(self, algebra, metric, segments, length=None, endpoint=None):
        self.algebra: GradedAlgebra = algebra
        self.metric: PoppMetric = metric
        self.segments: list[GVec] = list(segments)
        for seg in self.segments:
            if not seg.is_horizontal:
                raise CertificateFailure("path segment is not horizontal")
        if length is None:
            length = math.fsum(
                metric.layer_norm(1, s.layer(1)) for s in self.segments
            )
        self.length = length
        if endpoint is None:
            if self.segments:
                endpoint = product_fold(algebra, self.segments)
            else:
                endpoint = algebra.zero(exact=True)
        self.endpoint = endpoint

    def waypoints(self) -> list[GVec]:
        """Endpoint after each segment (float coordinates)."""
        out = []
        current = None
        for seg in self.segments:
            current = (
                seg if current is None else product_fold(
                    self.algebra, [current, seg]
                )
            )
            out.append(current.to_float())
        return out

    def dilate(self, t) -> "HorizontalPath":
        """Dilated path: segments scale by t, length by exactly float(t)."""
        t = Fraction(t) if not isinstance(t, float) else t
        segments = [s.scale(t) for s in self.segments]
        return HorizontalPath(
            self.algebra,
            self.metric,
            segments,
            length=float(t) * self.length,
            endpoint=self.algebra.dilate(t, self.endpoint),
        )

    def __repr__(self):
        return (
            f"HorizontalPath({len(self.segments)} segments,"
            f" length={self.length:.6g})"
        )


def commutator_word(arity: int) -> list[tuple[int, int]]:
    """Signed generator word of the right-nested group commutator.

    Returns (position, sign) pairs over row positions 0..arity-1.  Position
    i < arity-1 appears 2**(i+1) times, the last position 2**(arity-1)
    times; for arity 3 that is two, four and four occurrences.
    """
    if arity < 1:
        raise ValueError("arity must be >= 1")
    if arity == 1:
        return [(0, 1)]
    inner = [(pos + 1, sign) for pos, sign in commutator_word(arity - 1)]
    inverse = [(pos, -sign) for pos, sign in reversed(inner)]
    return [(0, 1)] + inner + [(0, -1)] + inverse


def row_segments(row, arity: int) -> list[GVec]:
    """Expand one adjusted row into signed segments, dropping zero letters."""
    if row.is_zero:
        return []
    out = []
    for pos, sign in commutator_word(arity):
        vec = row.vectors[pos]
        if vec.is_zero:
            continue
        out.append(vec if sign > 0 else -vec)
    return out


def path_from_tuple(tup: AdjustedTuple) -> HorizontalPath:
    """Concatenate the commutator words of every stage of a decomposition."""
    segments: list[GVec] = []
    for stage in tup.sets:
        for row in stage.rows:
            segments.extend(row_segments(row, stage.arity))
    path = HorizontalPath(tup.algebra, tup.metric, segments)
    _verify_path(path, tup)
    return path


def _verify_path(path: HorizontalPath, tup: AdjustedTuple) -> None:
    target = tup.target
    diff = path.endpoint - target
    if target.exact:
        if not diff.is_zero:
            raise CertificateFailure("path endpoint misses the target")
    else:
        err = tup.metric.vector_norm(diff)
        scale = max(1.0, tup.metric.vector_norm(target))
        if err > ENDPOINT_TOL * scale:
            raise CertificateFailure(f"path endpoint off by {err}")
    ceiling = cc_upper_bound(
        tup.algebra.step, tup.total_combinatorial_length()
    )
    if path.length > ceiling * (1 + 1e-12) + 1e-300:
        raise CertificateFailure(
            f"path length {path.length} above its ceiling {ceiling}"
        )


def certified_dcc_upper(
    algebra: GradedAlgebra, metric: PoppMetric, target: GVec
) -> tuple[HorizontalPath, float]:
    """Horizontal path ending exactly at the target; bound = its length."""
    tup = adjust_tuple(algebra, metric, target)
    path = path_from_tuple(tup)
    return path, path.length


def cc_lower_bound(metric: PoppMetric, x: GVec) -> float:
    """Layer-1 norm of the element: the abelianized distance lower bound."""
    return metric.layer_norm(1, x.layer(1))
