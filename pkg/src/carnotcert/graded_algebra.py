"""Stratified nilpotent Lie algebras given by rational structure constants.

A ``GradedAlgebra`` stores the layer dimensions (d_1, ..., d_k) and a sparse
bracket table on basis vectors; every loaded algebra is checked for
antisymmetry, grading closure, the Jacobi identity (all exact) and the
bracket-generating property (layer i is spanned by i-fold brackets of layer
1).  ``GVec`` is an element in graded coordinates; via exponential
coordinates of the first kind the same object doubles as a group element.

Scalars are Fractions (or RadExprs) in exact mode and plain floats in float
mode; the structure constants themselves are always exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache

from .errors import (
    AlgebraMismatch,
    AntisymmetryViolation,
    CapExceeded,
    GradingViolation,
    JacobiViolation,
    LayerOutOfRange,
    NonpositiveScale,
    NotBracketGenerating,
    ParseError,
    UnknownFamily,
    UnsupportedParams,
)
from .ratlinalg import mat_rank
from .scalars import RadExpr, as_float, is_zero_scalar, scalar_key
from .words import lyndon_basis_series, lyndon_decompose, lyndon_words

BasisIndex = tuple[int, int]  # (layer, index within layer), layer 1-based

DEFAULT_WORK_CAP = 4096


class GVec:
    """Element of a graded algebra in per-layer coordinates. Immutable."""

    __slots__ = ("algebra", "layers", "exact")

    def __init__(self, algebra: "GradedAlgebra", layers, exact: bool):
        self.algebra = algebra
        self.layers = tuple(tuple(layer) for layer in layers)
        self.exact = exact

    # -- linear structure ------------------------------------------------------

    def __add__(self, other: "GVec") -> "GVec":
        self._check_mate(other)
        layers = tuple(
            tuple(a + b for a, b in zip(la, lb))
            for la, lb in zip(self.layers, other.layers)
        )
        return GVec(self.algebra, layers, self.exact and other.exact)

    def __sub__(self, other: "GVec") -> "GVec":
        return self + (-other)

    def __neg__(self) -> "GVec":
        return GVec(
            self.algebra,
            tuple(tuple(-a for a in layer) for layer in self.layers),
            self.exact,
        )

    def scale(self, c) -> "GVec":
        exact = self.exact and not isinstance(c, float)
        return GVec(
            self.algebra,
            tuple(tuple(c * a for a in layer) for layer in self.layers),
            exact,
        )

    def __eq__(self, other):
        if not isinstance(other, GVec):
            return NotImplemented
        return self.algebra is other.algebra and all(
            a == b
            for la, lb in zip(self.layers, other.layers)
            for a, b in zip(la, lb)
        )

    def __hash__(self):
        return hash(self.key())

    def key(self):
        """Hashable coordinate key, canonical for dedup and tie-breaking."""
        return tuple(scalar_key(a) for layer in self.layers for a in layer)

    # -- structure queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return all(is_zero_scalar(a) for layer in self.layers for a in layer)

    @property
    def is_horizontal(self) -> bool:
        return all(
            is_zero_scalar(a) for layer in self.layers[1:] for a in layer
        )

    def layer(self, l: int) -> tuple:
        if not 1 <= l <= self.algebra.step:
            raise LayerOutOfRange(f"layer {l} outside 1..{self.algebra.step}")
        return self.layers[l - 1]

    def to_float(self) -> "GVec":
        return GVec(
            self.algebra,
            tuple(tuple(as_float(a) for a in layer) for layer in self.layers),
            exact=False,
        )

    def coords(self) -> tuple:
        return tuple(a for layer in self.layers for a in layer)

    def _check_mate(self, other: "GVec") -> None:
        if self.algebra is not other.algebra:
            raise AlgebraMismatch(
                f"vectors from {self.algebra.name!r} and {other.algebra.name!r}"
            )

    def __repr__(self):
        return f"GVec({self.algebra.name}, {self.layers})"


class GradedAlgebra:
    """Stratified nilpotent Lie algebra with rational structure constants."""

    def __init__(self, name: str, dims, bracket_entries, validate: bool = True):
        """bracket_entries: {((i,a),(j,b)): {(l,c): Fraction}} for a < b pairs
        in the flattened basis order; the antisymmetric closure is implied.
        """
        self.name = name
        self.dims = tuple(int(d) for d in dims)
        if not self.dims or any(d <= 0 for d in self.dims):
            raise ParseError(f"layer dimensions must be positive: {self.dims}")
        self.step = len(self.dims)
        self.dim = sum(self.dims)
        self._table: dict = {}
        self._fill_table(bracket_entries)
        if validate:
            self._validate_grading()
            self._validate_jacobi()
            self._validate_generating()

    # -- construction ----------------------------------------------------------

    def _flat(self, key: BasisIndex) -> int:
        layer, idx = key
        if not 1 <= layer <= self.step or not 0 <= idx < self.dims[layer - 1]:
            raise ParseError(f"basis index {key} out of range for dims {self.dims}")
        return sum(self.dims[: layer - 1]) + idx

    def basis_name(self, key: BasisIndex) -> str:
        return f"X{self._flat(key) + 1}"

    def _fill_table(self, entries) -> None:
        for (a, b), out in entries.items():
            fa, fb = self._flat(a), self._flat(b)
            if fa == fb and any(out.values()):
                raise AntisymmetryViolation(
                    f"[{self.basis_name(a)},{self.basis_name(a)}] must vanish"
                )
            clean = {t: Fraction(c) for t, c in out.items() if c}
            existing = self._table.get((a, b))
            if existing is not None and existing != clean:
                raise AntisymmetryViolation(
                    f"conflicting entries for [{self.basis_name(a)},{self.basis_name(b)}]"
                )
            self._table[(a, b)] = clean
            mirror = {t: -c for t, c in clean.items()}
            prior = self._table.get((b, a))
            if prior is not None and prior != mirror:
                raise AntisymmetryViolation(
                    f"[{self.basis_name(a)},{self.basis_name(b)}] and "
                    f"[{self.basis_name(b)},{self.basis_name(a)}] are not opposite"
                )
            self._table[(b, a)] = mirror

    def _validate_grading(self) -> None:
        for (a, b), out in self._table.items():
            target = a[0] + b[0]
            for (l, c), coeff in out.items():
                if coeff and l != target:
                    raise GradingViolation(
                        f"[{self.basis_name(a)},{self.basis_name(b)}] has a"
                        f" component in layer {l}, expected {target}"
                    )
                if not 1 <= l <= self.step:
                    raise GradingViolation(
                        f"bracket output layer {l} outside 1..{self.step}"
                    )

    def _basis_keys(self):
        for layer, d in enumerate(self.dims, start=1):
            for idx in range(d):
                yield (layer, idx)

    def _validate_jacobi(self) -> None:
        basis = list(self._basis_keys())
        vecs = {key: self.basis_vector(*key) for key in basis}
        for i, x in enumerate(basis):
            for j in range(i + 1, len(basis)):
                y = basis[j]
                for t in range(j + 1, len(basis)):
                    z = basis[t]
                    if x[0] + y[0] + z[0] > self.step:
                        continue
                    total = (
                        self.bracket(vecs[x], self.bracket(vecs[y], vecs[z]))
                        + self.bracket(vecs[y], self.bracket(vecs[z], vecs[x]))
                        + self.bracket(vecs[z], self.bracket(vecs[x], vecs[y]))
                    )
                    if not total.is_zero:
                        raise JacobiViolation(
                            "Jacobi identity fails on "
                            f"({self.basis_name(x)},{self.basis_name(y)},{self.basis_name(z)})"
                        )

    def _validate_generating(self) -> None:
        for layer in range(2, self.step + 1):
            rank = mat_rank(self.tensor_bracket_matrix(layer))
            if rank < self.dims[layer - 1]:
                raise NotBracketGenerating(
                    f"layer {layer}: bracket map has rank {rank} <"
                    f" {self.dims[layer - 1]}"
                )

    # -- vectors ---------------------------------------------------------------

    def zero(self, exact: bool = True) -> GVec:
        fill = Fraction(0) if exact else 0.0
        return GVec(self, tuple((fill,) * d for d in self.dims), exact)

    def basis_vector(self, layer: int, idx: int, exact: bool = True) -> GVec:
        if not 1 <= layer <= self.step:
            raise LayerOutOfRange(f"layer {layer} outside 1..{self.step}")
        one = Fraction(1) if exact else 1.0
        zero = Fraction(0) if exact else 0.0
        layers = [
            [one if (l == layer and i == idx) else zero for i in range(d)]
            for l, d in enumerate(self.dims, start=1)
        ]
        return GVec(self, layers, exact)

    def vector(self, coords, exact: bool = True) -> GVec:
        coords = list(coords)
        if len(coords) != self.dim:
            raise ParseError(
                f"expected {self.dim} coordinates, got {len(coords)}"
            )
        layers = []
        pos = 0
        for d in self.dims:
            chunk = coords[pos : pos + d]
            if exact:
                chunk = [
                    c if isinstance(c, RadExpr) else Fraction(c) for c in chunk
                ]
            else:
                chunk = [as_float(c) for c in chunk]
            layers.append(chunk)
            pos += d
        return GVec(self, layers, exact)

    def from_layer(self, layer: int, coords, exact: bool = True) -> GVec:
        if not 1 <= layer <= self.step:
            raise LayerOutOfRange(f"layer {layer} outside 1..{self.step}")
        v = self.zero(exact)
        layers = list(list(l) for l in v.layers)
        coords = list(coords)
        if len(coords) != self.dims[layer - 1]:
            raise ParseError(
                f"layer {layer} needs {self.dims[layer - 1]} coordinates"
            )
        if exact:
            coords = [
                c if isinstance(c, RadExpr) else Fraction(c) for c in coords
            ]
        else:
            coords = [as_float(c) for c in coords]
        layers[layer - 1] = coords
        return GVec(self, layers, exact)

    # -- operations --------------------------------------------------------------

    def bracket(self, u: GVec, v: GVec) -> GVec:
        u._check_mate(v)
        if u.algebra is not self:
            raise AlgebraMismatch("vectors do not belong to this algebra")
        exact = u.exact and v.exact
        acc = [list(layer) for layer in self.zero(exact).layers]
        u_items = [
            ((l + 1, i), c)
            for l, layer in enumerate(u.layers)
            for i, c in enumerate(layer)
            if not is_zero_scalar(c)
        ]
        v_items = [
            ((l + 1, i), c)
            for l, layer in enumerate(v.layers)
            for i, c in enumerate(layer)
            if not is_zero_scalar(c)
        ]
        for a, ca in u_items:
            for b, cb in v_items:
                if a[0] + b[0] > self.step:
                    continue
                out = self._table.get((a, b))
                if not out:
                    continue
                scale = ca * cb
                for (l, c), coeff in out.items():
                    acc[l - 1][c] = acc[l - 1][c] + coeff * scale
        return GVec(self, acc, exact)

    def iterated_bracket(self, vectors) -> GVec:
        """Right-nested bracket [v_0, [v_1, [...]]]; zero when depth > step."""
        vectors = list(vectors)
        if not vectors:
            raise ParseError("iterated bracket of an empty list")
        if len(vectors) > self.step:
            return self.zero(all(v.exact for v in vectors))
        out = vectors[-1]
        for v in reversed(vectors[:-1]):
            out = self.bracket(v, out)
        return out

    def dilate(self, t, v: GVec) -> GVec:
        """Graded dilation: layer j scales by t**j."""
        if isinstance(t, float):
            positive = t > 0
        else:
            t = Fraction(t)
            positive = t > 0
        if not positive:
            raise NonpositiveScale(f"dilation parameter must be positive: {t}")
        layers = []
        power = 1
        for layer in v.layers:
            power = power * t
            layers.append(tuple(power * a for a in layer))
        return GVec(self, layers, v.exact and not isinstance(t, float))

    def project_layer(self, v: GVec, l: int) -> tuple:
        """Coordinates of the layer-l component."""
        return v.layer(l)

    # -- tensor bracket matrices ---------------------------------------------------

    def layer_words(self, layer: int) -> list[tuple[int, ...]]:
        """Lex-ordered words over the layer-1 basis, of length ``layer``."""
        d1 = self.dims[0]
        words: list[tuple[int, ...]] = [()]
        for _ in range(layer):
            words = [w + (i,) for w in words for i in range(d1)]
        return words

    @lru_cache(maxsize=None)
    def tensor_bracket_matrix(self, layer: int):
        """Matrix of the i-fold bracket map V_1^{(x)i} -> V_i.

        Columns follow lex word order on the layer-1 basis; rows are layer-i
        coordinates.  Entries are exact rationals.
        """
        if not 2 <= layer <= self.step:
            raise LayerOutOfRange(f"layer {layer} outside 2..{self.step}")
        d = self.dims[layer - 1]
        cols = []
        for word in self.layer_words(layer):
            vec = self.iterated_bracket(
                [self.basis_vector(1, i) for i in word]
            )
            cols.append(vec.layer(layer))
        return tuple(
            tuple(col[r] for col in cols) for r in range(d)
        )

    def __repr__(self):
        return f"GradedAlgebra({self.name!r}, dims={self.dims})"


# -- loading -------------------------------------------------------------------


def _parse_coeff(raw) -> Fraction:
    try:
        if isinstance(raw, str):
            return Fraction(raw)
        if isinstance(raw, int):
            return Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational coefficient {raw!r}") from exc
    raise ParseError(f"coefficients must be ints or 'p/q' strings, got {raw!r}")


def load_algebra(doc) -> GradedAlgebra:
    """Build and validate an algebra from a structure-constant document.

    ``doc`` is a dict (already parsed JSON), a JSON string, or a file path.
    Schema: {"name": str, "dims": [int...], "brackets": [{"a": [layer, idx],
    "b": [layer, idx], "out": [{"layer": int, "idx": int, "coeff": "p/q"}]}]}
    with 1-based layers and basis indices and implicit antisymmetry.
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
        raise ParseError("algebra document must be a JSON object")
    try:
        name = str(doc.get("name", "anonymous"))
        dims = [int(d) for d in doc["dims"]]
        raw_brackets = doc.get("brackets", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed algebra document: {exc}") from exc
    if any(d <= 0 for d in dims):
        raise ParseError(f"dims must be positive: {dims}")

    entries: dict = {}
    for item in raw_brackets:
        try:
            a = (int(item["a"][0]), int(item["a"][1]) - 1)
            b = (int(item["b"][0]), int(item["b"][1]) - 1)
            out = {
                (int(o["layer"]), int(o["idx"]) - 1): _parse_coeff(o["coeff"])
                for o in item["out"]
            }
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"malformed bracket entry {item!r}: {exc}") from exc
        if (a, b) in entries:
            raise ParseError(f"duplicate bracket entry for {a}, {b}")
        entries[(a, b)] = out
    algebra = GradedAlgebra(name, dims, entries)
    if "inner1" in doc:
        gram = [[_parse_coeff(x) for x in row] for row in doc["inner1"]]
        algebra = orthonormalize_layer1(algebra, gram)
    return algebra


# -- builtin families ------------------------------------------------------------


@lru_cache(maxsize=None)
def builtin_family(name: str, params: tuple = (), work_cap: int = DEFAULT_WORK_CAP) -> GradedAlgebra:
    """Standard fixture algebras.

    heisenberg(n): dims (2n, 1) with [X_i, X_{n+i}] = X_{2n+1}.
    engel: dims (2, 1, 1) with [X1,X2] = X3, [X1,X3] = X4.
    free_nilpotent(d1, k): free k-step algebra on d1 generators over the
    Lyndon-word basis; layer sizes follow the Witt/necklace count.
    """
    if name == "heisenberg":
        n = params[0] if params else 1
        if n < 1:
            raise UnsupportedParams("heisenberg(n) needs n >= 1")
        entries = {
            ((1, i), (1, n + i)): {(2, 0): Fraction(1)} for i in range(n)
        }
        return GradedAlgebra(f"heisenberg({n})", (2 * n, 1), entries)
    if name == "engel":
        if params:
            raise UnsupportedParams("engel takes no parameters")
        entries = {
            ((1, 0), (1, 1)): {(2, 0): Fraction(1)},
            ((1, 0), (2, 0)): {(3, 0): Fraction(1)},
        }
        return GradedAlgebra("engel", (2, 1, 1), entries)
    if name == "free_nilpotent":
        if len(params) != 2:
            raise UnsupportedParams("free_nilpotent needs (d1, k)")
        d1, k = int(params[0]), int(params[1])
        if d1 < 1 or k < 1:
            raise UnsupportedParams("free_nilpotent needs d1 >= 1, k >= 1")
        if d1 ** k > work_cap:
            raise UnsupportedParams(
                f"free_nilpotent({d1},{k}) workload {d1 ** k} exceeds cap {work_cap}"
            )
        return _free_nilpotent(d1, k)
    raise UnknownFamily(f"unknown builtin family {name!r}")


def witt_dimension(d1: int, length: int) -> int:
    """Number of Lyndon words of the given length over d1 letters."""
    total = 0
    for m in range(1, length + 1):
        if length % m == 0:
            total += _moebius(m) * d1 ** (length // m)
    return total // length


def _moebius(n: int) -> int:
    if n == 1:
        return 1
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def _free_nilpotent(d1: int, k: int) -> GradedAlgebra:
    basis = lyndon_words(d1, k)
    by_layer: dict[int, list] = {}
    for w in basis:
        by_layer.setdefault(len(w), []).append(w)
    dims = tuple(len(by_layer.get(i, ())) for i in range(1, k + 1))
    index = {
        w: (length, pos)
        for length, group in by_layer.items()
        for pos, w in enumerate(sorted(group))
    }
    entries: dict = {}
    flat = sorted(basis, key=lambda w: (len(w), w))
    for i, w1 in enumerate(flat):
        for w2 in flat[i + 1 :]:
            if len(w1) + len(w2) > k:
                continue
            series = lyndon_basis_series(w1, k).commutator(
                lyndon_basis_series(w2, k)
            )
            out = {
                index[w]: c for w, c in lyndon_decompose(series).items() if c
            }
            if out:
                entries[(index[w1], index[w2])] = out
    algebra = GradedAlgebra(f"free_nilpotent({d1},{k})", dims, entries)
    for i in range(1, k + 1):
        expected = witt_dimension(d1, i)
        if dims[i - 1] != expected:
            raise CapExceeded(
                f"internal: layer {i} dimension {dims[i - 1]} != Witt count {expected}"
            )
    return algebra


def resolve_algebra(token: str, work_cap: int = DEFAULT_WORK_CAP) -> GradedAlgebra:
    """Resolve a CLI token: builtin spec like 'heisenberg:2' or a file path."""
    base, _, arg = token.partition(":")
    if base in ("heisenberg", "engel", "free_nilpotent"):
        params = tuple(int(x) for x in arg.split(",") if x) if arg else ()
        return builtin_family(base, params, work_cap)
    return load_algebra(token)


def orthonormalize_layer1(algebra: GradedAlgebra, gram) -> GradedAlgebra:
    """Absorb a declared layer-1 scalar product into the basis.

    ``gram`` is an SPD rational Gram matrix for the current layer-1 basis.
    The returned algebra presents the same Lie algebra in a layer-1 basis
    that is orthonormal for that product (upper layers unchanged), so all
    metric machinery can keep its identity-Gram convention.  The exact
    change of basis needs the LDL^T pivots to be rational squares; other
    Gram matrices are rejected rather than silently approximated.
    """
    from .ratlinalg import mat_inv as _inv
    from .scalars import fraction_nthroot

    d1 = algebra.dims[0]
    g = [[Fraction(x) for x in row] for row in gram]
    if len(g) != d1 or any(len(row) != d1 for row in g):
        raise UnsupportedParams(f"layer-1 Gram matrix must be {d1}x{d1}")
    if any(g[i][j] != g[j][i] for i in range(d1) for j in range(d1)):
        raise UnsupportedParams("layer-1 Gram matrix must be symmetric")
    lower = [[Fraction(1) if i == j else Fraction(0) for j in range(d1)] for i in range(d1)]
    diag: list[Fraction] = []
    for j in range(d1):
        pivot = g[j][j] - sum(lower[j][m] ** 2 * diag[m] for m in range(j))
        if pivot <= 0:
            raise UnsupportedParams("layer-1 Gram matrix is not positive definite")
        diag.append(pivot)
        for i in range(j + 1, d1):
            lower[i][j] = (
                g[i][j] - sum(lower[i][m] * lower[j][m] * diag[m] for m in range(j))
            ) / pivot
    roots = []
    for pivot in diag:
        root = fraction_nthroot(pivot, 2)
        if root is None:
            raise UnsupportedParams(
                "exact orthonormalization needs square LDL^T pivots;"
                f" got pivot {pivot}"
            )
        roots.append(root)
    lower_inv_t = tuple(zip(*_inv(tuple(tuple(r) for r in lower))))
    change = [
        [lower_inv_t[c][a] / roots[a] for a in range(d1)] for c in range(d1)
    ]  # column a holds the new basis vector f_a in old coordinates

    entries: dict = {}

    def add_out(a_key, b_key, out_vec: GVec, factor: Fraction):
        if out_vec.is_zero or factor == 0:
            return
        out = entries.setdefault((a_key, b_key), {})
        for layer, coords in enumerate(out_vec.layers, start=1):
            for idx, c in enumerate(coords):
                if c:
                    key = (layer, idx)
                    s = out.get(key, Fraction(0)) + factor * c
                    if s:
                        out[key] = s
                    else:
                        out.pop(key, None)

    basis = list(algebra._basis_keys())
    old_vec = {key: algebra.basis_vector(*key) for key in basis}
    new_layer1 = [
        sum(
            (old_vec[(1, c)].scale(change[c][a]) for c in range(d1)),
            algebra.zero(),
        )
        for a in range(d1)
    ]

    flat = [(1, a) for a in range(d1)] + [key for key in basis if key[0] >= 2]
    for i, a_key in enumerate(flat):
        va = new_layer1[a_key[1]] if a_key[0] == 1 else old_vec[a_key]
        for b_key in flat[i + 1 :]:
            vb = new_layer1[b_key[1]] if b_key[0] == 1 else old_vec[b_key]
            if a_key[0] + b_key[0] > algebra.step:
                continue
            add_out(a_key, b_key, algebra.bracket(va, vb), Fraction(1))

    entries = {
        pair: out for pair, out in entries.items() if any(out.values())
    }
    return GradedAlgebra(
        f"{algebra.name}|onb", algebra.dims, entries
    )
