"""Exact truncated group law and canonical bracket-coefficient tables.

The product of group elements (in exponential coordinates of the first kind)
is evaluated by substituting the two factors into a canonical right-nested
bracket table for the two-letter group law, computed once per nilpotency
step from exp/log in the truncated free associative algebra.  Tables for the
N-factor product expansion and for the tail of iterated group commutators
are produced the same way; their entries are what the quantitative error
bounds downstream are built from.

Coefficient tables are not unique (right-nested brackets only span, they are
not a basis); the canonical choice here is the Dynkin-Specht-Wever rewrite
with sign-normalized folding from :mod:`carnotcert.words`, which reproduces
the familiar compact coefficients (1/2, 1/12, ...).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ArityOutOfRange,
    ArityTooSmall,
    CapExceeded,
    CertificateFailure,
    EmptyProduct,
)
from .graded_algebra import DEFAULT_WORK_CAP, GradedAlgebra, GVec
from .words import (
    EMPTY,
    FreeSeries,
    dsw_entries,
    exp_series,
    inverse_series,
    log_series,
    right_nested_series,
)

_lock = threading.Lock()
_beta_cache: dict = {}
_gamma_cache: dict = {}


@dataclass(frozen=True)
class CoeffTable:
    """Canonical bracket coefficients, 1-based letter indices.

    kind 'beta': X_1 ... X_N = sum X_n + sum_w entries[w] [X_{w_1},...,X_{w_p}].
    kind 'gamma': [X_1,...,X_j]_c = [X_1,...,X_j] + sum_w entries[w] [...],
    with all words of length >= j+1.
    """

    kind: str
    param: int  # N for beta, j for gamma
    step: int
    entries: dict

    def __post_init__(self):
        for w in self.entries:
            if len(w) > self.step:
                raise CertificateFailure(f"table word {w} longer than step")
            if self.kind == "gamma" and len(w) < self.param + 1:
                raise CertificateFailure(
                    f"gamma table word {w} shorter than {self.param + 1}"
                )
            if self.kind == "beta" and len(w) < 2:
                raise CertificateFailure(f"beta table word {w} shorter than 2")

    def substitute(self, algebra: GradedAlgebra, vectors) -> GVec:
        """sum_w entries[w] * [v_{w_1}, ..., v_{w_p}] in the algebra."""
        out = algebra.zero(all(v.exact for v in vectors))
        for word in sorted(self.entries):
            coeff = self.entries[word]
            term = algebra.iterated_bracket([vectors[i - 1] for i in word])
            out = out + term.scale(coeff)
        return out

    def to_json_dict(self) -> dict:
        key = "N" if self.kind == "beta" else "j"
        return {
            "kind": self.kind,
            key: self.param,
            "k": self.step,
            "entries": [
                {"idx": list(w), "coeff": str(self.entries[w])}
                for w in sorted(self.entries, key=lambda t: (len(t), t))
            ],
        }


def _beta_workload(n_factors: int, step: int) -> int:
    return n_factors ** step


def beta_table(
    n_factors: int, step: int, work_cap: int = DEFAULT_WORK_CAP
) -> CoeffTable:
    """Canonical expansion of an N-fold product over right-nested brackets."""
    if n_factors < 1 or step < 1:
        raise ArityOutOfRange("beta table needs N >= 1, k >= 1")
    if _beta_workload(n_factors, step) > work_cap:
        raise CapExceeded(
            f"beta table workload {n_factors}**{step} exceeds cap {work_cap}"
        )
    key = (n_factors, step)
    with _lock:
        if key not in _beta_cache:
            _beta_cache[key] = _compute_beta(n_factors, step)
        return _beta_cache[key]


def _compute_beta(n_factors: int, step: int) -> CoeffTable:
    product = FreeSeries.unit(step)
    for i in range(n_factors):
        product = product * exp_series(FreeSeries.letter(i, step))
    lie = log_series(product)
    linear = lie.component(1)
    expected = {(i,): Fraction(1) for i in range(n_factors)}
    if linear != expected:
        raise CertificateFailure("product log has a non-standard linear part")
    entries = {
        tuple(i + 1 for i in w): c for w, c in dsw_entries(lie).items()
    }
    return CoeffTable("beta", n_factors, step, entries)


def gamma_table(arity: int, step: int) -> CoeffTable:
    """Tail of the iterated group commutator beyond the iterated bracket."""
    if not 2 <= arity <= step:
        raise ArityOutOfRange(
            f"gamma table needs 2 <= j <= k, got j={arity}, k={step}"
        )
    key = (arity, step)
    with _lock:
        if key not in _gamma_cache:
            _gamma_cache[key] = _compute_gamma(arity, step)
        return _gamma_cache[key]


def _commutator_series(u: FreeSeries, v: FreeSeries) -> FreeSeries:
    return u * v * inverse_series(u) * inverse_series(v)


def _compute_gamma(arity: int, step: int) -> CoeffTable:
    group = exp_series(FreeSeries.letter(arity - 1, step))
    for i in range(arity - 2, -1, -1):
        group = _commutator_series(exp_series(FreeSeries.letter(i, step)), group)
    lie = log_series(group)
    head = right_nested_series(tuple(range(arity)), step)
    tail = lie - head
    if any(len(w) <= arity for w in tail.terms):
        raise CertificateFailure(
            "iterated commutator tail has low-degree terms"
        )
    entries = {
        tuple(i + 1 for i in w): c
        for w, c in dsw_entries(tail, min_degree=arity + 1).items()
    }
    return CoeffTable("gamma", arity, step, entries)


# -- group operations -----------------------------------------------------------


def bch_product(algebra: GradedAlgebra, x: GVec, y: GVec) -> GVec:
    """Group product log(exp x * exp y), exact and truncated by grading."""
    table = beta_table(2, algebra.step)
    return x + y + table.substitute(algebra, [x, y])


def product_fold(algebra: GradedAlgebra, factors) -> GVec:
    """Left-to-right group product of a nonempty list of elements."""
    factors = list(factors)
    if not factors:
        raise EmptyProduct("group product of an empty list")
    out = factors[0]
    for f in factors[1:]:
        out = bch_product(algebra, out, f)
    return out


def group_commutator(algebra: GradedAlgebra, x: GVec, y: GVec) -> GVec:
    """x y x^{-1} y^{-1}; inverses are negation in first-kind coordinates."""
    return product_fold(algebra, [x, y, -x, -y])


def iterated_group_commutator(algebra: GradedAlgebra, elements) -> GVec:
    """Right-nested group commutator [x_1, [x_2, [...]]]_c, arity >= 2."""
    elements = list(elements)
    if len(elements) < 2:
        raise ArityTooSmall("iterated group commutator needs >= 2 arguments")
    out = elements[-1]
    for x in reversed(elements[:-1]):
        out = group_commutator(algebra, x, out)
    return out


def max_coeff_constants(
    d1: int, arity: int, step: int, work_cap: int = DEFAULT_WORK_CAP
) -> tuple[Fraction, Fraction]:
    """Worst-case table magnitudes feeding the layer-error constant.

    Returns (beta_max, gamma_weight): beta_max is the largest |entry| in the
    product table for d1**arity factors; gamma_weight is max(1, largest
    per-length sum of |entry|) in the commutator-tail table.  A word of
    length <= k touches at most k distinct factors and its coefficient only
    depends on their relative order, so the product table is evaluated with
    min(d1**arity, k) letters.
    """
    if arity < 1 or step < 1:
        raise ArityOutOfRange("max_coeff_constants needs j >= 1, k >= 1")
    n_factors = d1 ** arity
    effective = min(n_factors, step)
    table = beta_table(effective, step, work_cap)
    beta_max = max((abs(c) for c in table.entries.values()), default=Fraction(0))
    gamma_weight = Fraction(1)
    if 2 <= arity < step:
        tail = gamma_table(arity, step)
        by_len: dict[int, Fraction] = {}
        for w, c in tail.entries.items():
            by_len[len(w)] = by_len.get(len(w), Fraction(0)) + abs(c)
        if by_len:
            gamma_weight = max(gamma_weight, max(by_len.values()))
    return beta_max, gamma_weight
