"""Lattices by Malcev data, covolumes, short elements, systolic reports.

A lattice is given by the logarithms of its generators plus a declared
filtration-adapted Malcev basis.  In first-kind exponential coordinates Haar
measure is Lebesgue and the change to second-kind coordinates is unipotent,
so the quotient volume is the determinant of the basis logs in the
orthonormal frame of the volume form; the filtration-adapted shape (leading
layers nondecreasing, each layer block of full rank) is what legitimizes
that formula and is checked on load.

The shortest-loop search enumerates group words in the generators up to a
word radius, certifies an explicit horizontal path for every element, and
reports the minimum length together with the trivial abelianized lower
bound and the volume-based ceiling.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .certificates import BoxConstants
from .errors import (
    ExplosionGuard,
    NotFiltrationAdapted,
    ParseError,
    SingularBasis,
)
from .bch_engine import bch_product
from .graded_algebra import DEFAULT_WORK_CAP, GradedAlgebra, GVec, resolve_algebra
from .path_synth import cc_lower_bound, certified_dcc_upper
from .popp_metric import PoppMetric
from .ratlinalg import mat_rank

DEFAULT_BALL_CAP = 10 ** 6


class Lattice:
    """Discrete cocompact subgroup presented by generator and basis logs."""

    def __init__(self, algebra, generator_logs, malcev_logs, name="lattice"):
        self.algebra: GradedAlgebra = algebra
        self.generator_logs: list[GVec] = list(generator_logs)
        self.malcev_logs: list[GVec] = list(malcev_logs)
        self.name = name
        self._validate()

    def _validate(self) -> None:
        n = self.algebra.dim
        if len(self.malcev_logs) != n:
            raise NotFiltrationAdapted(
                f"need {n} Malcev basis vectors, got {len(self.malcev_logs)}"
            )
        if not all(
            v.exact for v in self.malcev_logs + self.generator_logs
        ):
            raise ParseError("lattice logs must be exact rationals")
        rows = tuple(
            tuple(Fraction(c) for c in v.coords()) for v in self.malcev_logs
        )
        if mat_rank(rows) != n:
            raise SingularBasis("Malcev basis logs are linearly dependent")

        leading = [self._leading_layer(v) for v in self.malcev_logs]
        if any(
            a > b for a, b in zip(leading, leading[1:])
        ):
            raise NotFiltrationAdapted(
                "Malcev basis leading layers must be nondecreasing"
            )
        for layer in range(1, self.algebra.step + 1):
            members = [
                v
                for v, lead in zip(self.malcev_logs, leading)
                if lead == layer
            ]
            want = self.algebra.dims[layer - 1]
            if len(members) != want:
                raise NotFiltrationAdapted(
                    f"layer {layer}: {len(members)} basis vectors with leading"
                    f" layer {layer}, expected {want}"
                )
            block = tuple(
                tuple(Fraction(c) for c in v.layer(layer)) for v in members
            )
            if mat_rank(block) != want:
                raise NotFiltrationAdapted(
                    f"layer {layer}: leading blocks are rank deficient"
                )

    def _leading_layer(self, v: GVec) -> int:
        for layer in range(1, self.algebra.step + 1):
            if any(c != 0 for c in v.layer(layer)):
                return layer
        raise SingularBasis("zero vector in Malcev basis")

    def __repr__(self):
        return f"Lattice({self.name}, algebra={self.algebra.name})"


def load_lattice(doc, work_cap: int = DEFAULT_WORK_CAP) -> Lattice:
    """Load from a dict, JSON string, or file path.

    Schema: {"algebra": builtin-token-or-path, "generators": [[coords...]],
    "malcev_basis": [[coords...]]} with rational-string or integer coords.
    """
    if isinstance(doc, str):
        try:
            if doc.lstrip().startswith("{"):
                doc = json.loads(doc)
            else:
                with open(doc, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("lattice document must be a JSON object")
    try:
        algebra = doc["algebra"]
        if isinstance(algebra, str):
            algebra = resolve_algebra(algebra, work_cap)
        gens = [
            _rational_vector(algebra, coords) for coords in doc["generators"]
        ]
        basis = [
            _rational_vector(algebra, coords)
            for coords in doc["malcev_basis"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed lattice document: {exc}") from exc
    return Lattice(algebra, gens, basis, name=str(doc.get("name", "lattice")))


def _rational_vector(algebra: GradedAlgebra, coords) -> GVec:
    return algebra.vector([Fraction(str(c)) for c in coords], exact=True)


def covolume(lattice: Lattice, metric: PoppMetric) -> float:
    """Quotient volume: |det| of the Malcev logs in the orthonormal frame."""
    return metric.covolume(lattice.malcev_logs)


def enumerate_ball(
    lattice: Lattice, radius: int, cap: int = DEFAULT_BALL_CAP
) -> list[tuple[GVec, str]]:
    """Nontrivial products of at most ``radius`` generators or inverses.

    Breadth-first with exact-coordinate dedup, so each element carries a
    shortest word; the identity is excluded.  Deterministic order: sorted by
    (word length, coordinate key).
    """
    if radius < 1:
        raise ParseError("word radius must be >= 1")
    steps = []
    for i, g in enumerate(lattice.generator_logs, start=1):
        steps.append((g, f"g{i}"))
        steps.append((-g, f"g{i}^-1"))
    identity = lattice.algebra.zero(exact=True)
    seen = {identity.key(): (identity, "", 0)}
    frontier = [identity]
    for depth in range(1, radius + 1):
        new_frontier = []
        for base in frontier:
            base_word = seen[base.key()][1]
            for g, token in steps:
                element = bch_product(lattice.algebra, base, g)
                key = element.key()
                if key in seen:
                    continue
                if len(seen) > cap:
                    raise ExplosionGuard(
                        f"ball enumeration exceeded {cap} elements"
                    )
                word = f"{base_word}.{token}" if base_word else token
                seen[key] = (element, word, depth)
                new_frontier.append(element)
        frontier = new_frontier
    out = [
        (vec, word)
        for vec, word, depth in seen.values()
        if depth > 0
    ]
    out.sort(key=lambda pair: (len(pair[1].split(".")), _tie_key(pair[0])))
    return out


def _tie_key(v: GVec):
    coords = [Fraction(c) for c in v.coords()]
    return tuple((abs(c), 0 if c >= 0 else 1) for c in coords)


def systole_upper_bound(
    lattice: Lattice,
    metric: PoppMetric,
    radius: int,
    cap: int = DEFAULT_BALL_CAP,
) -> dict:
    """Certified loop-length bound: min path length over enumerated elements.

    Returns the minimizer, its word and certificate data, plus per-element
    rows for reporting.  Monotone nonincreasing in the radius.
    """
    elements = enumerate_ball(lattice, radius, cap)
    best = None
    rows = []
    for vec, word in elements:
        path, upper = certified_dcc_upper(lattice.algebra, metric, vec)
        lower = cc_lower_bound(metric, vec)
        rows.append(
            {
                "word": word,
                "coords": [str(Fraction(c)) for c in vec.coords()],
                "lower": lower,
                "upper": upper,
            }
        )
        key = (upper, _tie_key(vec))
        if best is None or key < best[0]:
            best = (key, vec, word, path, upper, lower)
    if best is None:
        raise ExplosionGuard("no nontrivial elements enumerated")
    _, vec, word, path, upper, lower = best
    return {
        "bound": upper,
        "lower_bound": lower,
        "minimizer_coords": [str(Fraction(c)) for c in vec.coords()],
        "minimizer_word": word,
        "segments": len(path.segments),
        "rows": rows,
    }


def check_systolic_inequality(
    lattice: Lattice,
    metric: PoppMetric,
    constants: BoxConstants,
    radius: int,
    cap: int = DEFAULT_BALL_CAP,
) -> dict:
    """Compare the certified loop bound against C * vol**(1/Q)."""
    if tuple(constants.dims) != tuple(lattice.algebra.dims):
        raise ParseError("constants were computed for different dimensions")
    sys_data = systole_upper_bound(lattice, metric, radius, cap)
    vol = covolume(lattice, metric)
    q = constants.hausdorff_dim
    rhs = constants.systolic_constant * vol ** (1.0 / q)
    return {
        "sys_upper": sys_data["bound"],
        "sys_lower_bound_of_minimizer": sys_data["lower_bound"],
        "minimizer_word": sys_data["minimizer_word"],
        "minimizer_coords": sys_data["minimizer_coords"],
        "covolume": vol,
        "hausdorff_dimension": q,
        "systolic_constant": constants.systolic_constant,
        "rhs": rhs,
        "ratio": sys_data["bound"] / rhs,
        "satisfied": sys_data["bound"] <= rhs,
        "radius": radius,
        "rows": sys_data["rows"],
    }
