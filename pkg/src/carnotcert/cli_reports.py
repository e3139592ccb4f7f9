"""Command-line entry point with deterministic machine-readable reports.

Every command emits one JSON report {command, inputs_digest, seed, version,
payload}; identical inputs and seed give byte-identical output (timing is
logged to stderr, never into the report).  Exit codes: 0 success, 1 I/O,
2 validation failure, 3 resource cap, 4 certificate failure (an internal
exactness check that can only fail on an implementation bug).
"""

from __future__ import annotations

import csv as csv_module
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

import click
import numpy as np

from . import __version__
from .adjustment import adjust_to_layer_vector, adjust_tuple
from .bch_engine import beta_table, gamma_table
from .certificates import global_constants
from .errors import (
    CapExceeded,
    CarnotError,
    CertificateFailure,
    ExplosionGuard,
    ParseError,
    RecursionFailure,
)
from .graded_algebra import DEFAULT_WORK_CAP, GradedAlgebra, GVec, resolve_algebra
from .lattice_systole import (
    DEFAULT_BALL_CAP,
    check_systolic_inequality,
    load_lattice,
)
from .path_synth import cc_lower_bound, certified_dcc_upper
from .popp_metric import PoppMetric, build_popp
from .scalars import RadExpr, as_float

EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_CERTIFICATE = 4


def work_cap() -> int:
    raw = os.environ.get("CARNOT_CERT_CAP")
    return int(raw) if raw else DEFAULT_WORK_CAP


def ball_cap() -> int:
    raw = os.environ.get("CARNOT_CERT_CAP")
    return int(raw) if raw else DEFAULT_BALL_CAP


def _digest(token: str | None, *paths) -> str:
    h = hashlib.sha256()
    if token:
        h.update(token.encode("utf-8"))
    for path in paths:
        if path and os.path.exists(path):
            with open(path, "rb") as fh:
                h.update(fh.read())
    return "sha256:" + h.hexdigest()


def _scalar_json(x):
    """Rational scalars as exact strings, irrational ones as floats."""
    if isinstance(x, RadExpr):
        if x.is_rational:
            return str(x.rational_value())
        return as_float(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return x
    return str(Fraction(x))


def _vector_json(v: GVec) -> dict:
    return {
        "coords": [_scalar_json(c) for c in v.coords()],
        "coords_float": [as_float(c) for c in v.coords()],
    }


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, RadExpr):
            return _scalar_json(o)
        return super().default(o)


def _emit(ctx, command: str, payload: dict, digest: str, started: float):
    report = {
        "command": command,
        "inputs_digest": digest,
        "seed": ctx.obj.get("seed", 0),
        "version": __version__,
        "payload": payload,
    }
    text = json.dumps(report, indent=2, sort_keys=True, cls=_Encoder)
    click.echo(text)
    out = ctx.obj.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    click.echo(f"elapsed: {time.perf_counter() - started:.3f}s", err=True)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv_module.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format(x, ".17g") if isinstance(x, float) else x for x in row]
            )


def _fail(exc: BaseException) -> None:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, (CapExceeded, ExplosionGuard)):
        sys.exit(EXIT_CAP)
    if isinstance(exc, (CertificateFailure, RecursionFailure)):
        sys.exit(EXIT_CERTIFICATE)
    if isinstance(exc, CarnotError):
        sys.exit(EXIT_VALIDATION)
    if isinstance(exc, (OSError, json.JSONDecodeError)):
        sys.exit(EXIT_IO)
    raise exc


def _algebra_from(ctx, override: str | None) -> tuple[GradedAlgebra, str]:
    token = override or ctx.obj.get("algebra")
    if not token:
        raise click.UsageError("no algebra given (use --algebra)")
    return resolve_algebra(token, work_cap()), token


def _parse_coords(text: str) -> list[Fraction]:
    try:
        return [Fraction(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad coordinate list {text!r}") from exc


@click.group()
@click.option("--algebra", default=None, help="builtin token (heisenberg[:n], engel, free_nilpotent:d1,k) or spec file path")
@click.option("--mode", type=click.Choice(["rational", "float"]), default="rational", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="also write the report to this file")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="write auxiliary CSV rows here")
@click.pass_context
def main(ctx, algebra, mode, seed, out, csv_path):
    """Certified Carnot-group computations with machine-readable reports."""
    ctx.ensure_object(dict)
    ctx.obj.update(
        algebra=algebra, mode=mode, seed=seed, out=out, csv=csv_path
    )


@main.group()
def algebra():
    """Structure-constant document operations."""


@algebra.command("check")
@click.argument("spec", required=False)
@click.pass_context
def algebra_check(ctx, spec):
    """Validate an algebra document or builtin token."""
    started = time.perf_counter()
    token = spec or ctx.obj.get("algebra")
    if not token:
        raise click.UsageError("give a spec path or builtin token")
    digest = _digest(token, token if os.path.exists(token) else None)
    try:
        alg = resolve_algebra(token, work_cap())
    except CarnotError as exc:
        payload = {
            "ok": False,
            "failure": type(exc).__name__,
            "detail": str(exc),
        }
        _emit(ctx, "algebra check", payload, digest, started)
        sys.exit(EXIT_VALIDATION if not isinstance(exc, CapExceeded) else EXIT_CAP)
    except OSError as exc:
        _fail(exc)
    payload = {
        "ok": True,
        "name": alg.name,
        "dims": list(alg.dims),
        "step": alg.step,
        "hausdorff_dimension": sum(
            i * d for i, d in enumerate(alg.dims, start=1)
        ),
    }
    _emit(ctx, "algebra check", payload, digest, started)


@main.group()
def popp():
    """Induced layer metric queries."""


@popp.command("gram")
@click.option("--algebra", "algebra_opt", default=None)
@click.pass_context
def popp_gram(ctx, algebra_opt):
    """Dump bracket matrices, Gram matrices and the orthonormal frame."""
    started = time.perf_counter()
    try:
        alg, token = _algebra_from(ctx, algebra_opt)
        metric = build_popp(alg)
        layers = {}
        for layer in range(1, alg.step + 1):
            entry = {
                "gram": [[str(x) for x in row] for row in metric.grams[layer]],
                "gram_det": str(metric.gram_dets.get(layer, Fraction(1))),
                "frame": metric.orthonormal_frame().get(
                    layer, _identity_float(alg.dims[layer - 1])
                ),
            }
            if layer >= 2:
                entry["bracket_matrix"] = [
                    [str(x) for x in row]
                    for row in metric.bracket_matrices[layer]
                ]
            layers[str(layer)] = entry
        payload = {
            "algebra": alg.name,
            "dims": list(alg.dims),
            "frame_density": metric.frame_density(),
            "layers": layers,
        }
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(ctx, "popp gram", payload, _digest(token, token), started)


def _identity_float(n: int) -> list[list[float]]:
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


@main.command("constants")
@click.option("--algebra", "algebra_opt", default=None)
@click.pass_context
def constants_cmd(ctx, algebra_opt):
    """Box radii and the derived volume / systolic constants."""
    started = time.perf_counter()
    try:
        alg, token = _algebra_from(ctx, algebra_opt)
        box = global_constants(alg.dims, work_cap())
        payload = {
            "algebra": alg.name,
            "dims": list(box.dims),
            "radii": [str(r) for r in box.radii],
            "radii_float": [float(r) for r in box.radii],
            "hausdorff_dimension": box.hausdorff_dim,
            "ball_volume_lower_bound": box.ball_volume_lower,
            "ball_volume_exact": {
                "rational": str(box.ball_volume_frac),
                "pi_exponent": box.ball_volume_pi_exp,
            },
            "systolic_constant": box.systolic_constant,
            "trace": [
                {
                    "level": e["level"],
                    "T": str(e["T"]),
                    "T_float": float(e["T"]),
                    "eps_hat": str(e["eps_hat"]),
                    "eps_hat_float": float(e["eps_hat"]),
                    "eps_tilde": [str(x) for x in e["eps_tilde"]],
                    "q_value": e["q_value"],
                    "cap": e["cap"],
                    "residual": e["residual"],
                }
                for e in box.trace
            ],
        }
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(ctx, "constants", payload, _digest(token, token), started)


@main.command("adjust")
@click.option("--algebra", "algebra_opt", default=None)
@click.option("--target", required=True, help="comma-separated rational coordinates")
@click.option("--layer", type=int, default=None, help="adjust a single layer vector instead of a full vector")
@click.pass_context
def adjust_cmd(ctx, algebra_opt, target, layer):
    """Balanced horizontal decomposition with verified conditions."""
    started = time.perf_counter()
    try:
        alg, token = _algebra_from(ctx, algebra_opt)
        metric = build_popp(alg)
        exact = ctx.obj.get("mode", "rational") == "rational"
        coords = _parse_coords(target)
        if not exact:
            coords = [float(c) for c in coords]
        if layer is not None:
            hs = adjust_to_layer_vector(alg, metric, coords, layer, exact)
            payload = {
                "algebra": alg.name,
                "kind": "layer_set",
                "layer": layer,
                "conditions": hs.verify_conditions(),
                "combinatorial_length": hs.combinatorial_length(),
                "rows": [
                    {
                        "word": [i + 1 for i in r.word]
                        if r.word is not None
                        else None,
                        "alpha": _scalar_json(r.alpha)
                        if r.alpha is not None
                        else None,
                        "sign": r.sign,
                        "scale": as_float(r.scale),
                        "vectors": [_vector_json(v) for v in r.vectors],
                    }
                    for r in hs.rows
                ],
                "layer_errors": {
                    str(l): [_scalar_json(c) for c in coords_l]
                    for l, coords_l in hs.layer_error_vectors().items()
                },
            }
        else:
            vec = alg.vector(coords, exact)
            tup = adjust_tuple(alg, metric, vec)
            payload = {
                "algebra": alg.name,
                "kind": "tuple",
                "target": _vector_json(vec),
                "stage_conditions": [
                    s.verify_conditions() for s in tup.sets
                ],
                "stage_lengths": tup.stage_lengths(),
                "total_combinatorial_length": tup.total_combinatorial_length(),
                "prefix_errors": {
                    f"{l},{j}": [_scalar_json(c) for c in coords_l]
                    for (l, j), coords_l in sorted(tup.prefix_errors.items())
                },
                "reconstruction_exact": vec.exact,
            }
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(ctx, "adjust", payload, _digest(token, token), started)


@main.command("path")
@click.option("--algebra", "algebra_opt", default=None)
@click.option("--target", required=True, help="comma-separated rational coordinates")
@click.pass_context
def path_cmd(ctx, algebra_opt, target):
    """Certified horizontal path to the target with its length bound."""
    started = time.perf_counter()
    try:
        alg, token = _algebra_from(ctx, algebra_opt)
        metric = build_popp(alg)
        exact = ctx.obj.get("mode", "rational") == "rational"
        coords = _parse_coords(target)
        if not exact:
            coords = [float(c) for c in coords]
        vec = alg.vector(coords, exact)
        path, bound = certified_dcc_upper(alg, metric, vec)
        payload = {
            "algebra": alg.name,
            "target": _vector_json(vec),
            "bound": bound,
            "length": path.length,
            "segments": [
                [as_float(c) for c in seg.layer(1)] for seg in path.segments
            ],
            "segment_count": len(path.segments),
            "endpoint_matches_target": True,
            "endpoint_exact": exact,
            "lower_bound": cc_lower_bound(metric, vec),
        }
        csv_path = ctx.obj.get("csv")
        if csv_path:
            rows = []
            for i, wp in enumerate(path.waypoints(), start=1):
                rows.append([i] + [as_float(c) for c in wp.coords()])
            _write_csv(
                csv_path,
                ["segment"] + [f"x{i + 1}" for i in range(alg.dim)],
                rows,
            )
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(ctx, "path", payload, _digest(token, token), started)


def sample_in_box(
    algebra: GradedAlgebra,
    metric: PoppMetric,
    radii,
    rng: np.random.Generator,
) -> GVec:
    """Uniform-in-ball per-layer sample, returned as an exact rational vector.

    Per layer: Gaussian direction, norm measured with the layer Gram matrix,
    radius scaled by u**(1/d).  Floats are rationalized and the exact layer
    quadratic form is re-checked against the radius, so every emitted sample
    is inside the box by construction.
    """
    coords: list[Fraction] = []
    for layer, (d, radius) in enumerate(
        zip(algebra.dims, radii), start=1
    ):
        radius = Fraction(radius)
        for _ in range(64):
            direction = rng.standard_normal(d)
            u = rng.uniform()
            norm = metric.layer_norm(layer, list(direction))
            if norm == 0.0:
                continue
            scale = float(radius) * u ** (1.0 / d) * (1 - 1e-9) / norm
            layer_coords = [
                Fraction(x * scale).limit_denominator(10 ** 12)
                for x in direction
            ]
            quad = metric.layer_quadform(layer, layer_coords)
            if quad <= radius * radius:
                coords.extend(layer_coords)
                break
        else:
            coords.extend([Fraction(0)] * d)
    return algebra.vector(coords, exact=True)


@main.command("box-verify")
@click.option("--algebra", "algebra_opt", default=None)
@click.option("--samples", type=int, required=True)
@click.pass_context
def box_verify(ctx, algebra_opt, samples):
    """Sample the radius box and certify a unit path for every sample."""
    started = time.perf_counter()
    if samples < 0:
        raise click.UsageError("--samples must be >= 0")
    try:
        alg, token = _algebra_from(ctx, algebra_opt)
        metric = build_popp(alg)
        box = global_constants(alg.dims, work_cap())
        seed = ctx.obj.get("seed", 0)
        rng = np.random.default_rng(seed)
        exact = ctx.obj.get("mode", "rational") == "rational"
        bins = [0.0] * 21
        max_bound = 0.0
        worst: GVec | None = None
        for _ in range(samples):
            vec = sample_in_box(alg, metric, box.radii, rng)
            if not exact:
                vec = vec.to_float()
            try:
                _, bound = certified_dcc_upper(alg, metric, vec)
            except CertificateFailure as exc:
                click.echo(
                    "certificate failure at target "
                    f"{[str(c) for c in vec.coords()]}",
                    err=True,
                )
                raise
            if bound > max_bound:
                max_bound = bound
                worst = vec
            slot = min(20, int(bound * 20))
            bins[slot] += 1
        payload = {
            "algebra": alg.name,
            "samples": samples,
            "radii": [str(r) for r in box.radii],
            "max_bound": max_bound,
            "all_within_unit": max_bound <= 1.0,
            "histogram_edges": [i / 20 for i in range(22)],
            "histogram_counts": [int(c) for c in bins],
            "worst_target": [str(Fraction(c)) for c in worst.coords()]
            if worst is not None and worst.exact
            else None,
        }
        if samples and max_bound > 1.0:
            _emit(ctx, "box-verify", payload, _digest(token, token), started)
            raise CertificateFailure(
                f"sampled bound {max_bound} exceeds 1 at {payload['worst_target']}"
            )
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(ctx, "box-verify", payload, _digest(token, token), started)


@main.command("systole")
@click.option("--lattice", "lattice_path", required=True, type=click.Path(exists=False))
@click.option("--radius", type=int, required=True)
@click.pass_context
def systole_cmd(ctx, lattice_path, radius):
    """Systolic inequality report for a lattice document."""
    started = time.perf_counter()
    if radius < 1:
        raise click.UsageError("--radius must be >= 1")
    try:
        lattice = load_lattice(lattice_path, work_cap())
        metric = build_popp(lattice.algebra)
        box = global_constants(lattice.algebra.dims, work_cap())
        report = check_systolic_inequality(
            lattice, metric, box, radius, ball_cap()
        )
        rows = report.pop("rows")
        payload = {"algebra": lattice.algebra.name, "lattice": lattice.name}
        payload.update(report)
        csv_path = ctx.obj.get("csv")
        if csv_path:
            _write_csv(
                csv_path,
                ["word", "coords", "lower", "upper"],
                [
                    [r["word"], " ".join(r["coords"]), r["lower"], r["upper"]]
                    for r in rows
                ],
            )
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(
        ctx,
        "systole",
        payload,
        _digest(lattice_path, lattice_path),
        started,
    )


@main.group()
def bch():
    """Group-law coefficient tables."""


@bch.command("tables")
@click.option("--kind", type=click.Choice(["beta", "gamma"]), required=True)
@click.option("--n", "n_factors", type=int, default=None, help="factor count (beta)")
@click.option("--j", "arity", type=int, default=None, help="commutator arity (gamma)")
@click.option("--k", "step", type=int, required=True)
@click.pass_context
def bch_tables(ctx, kind, n_factors, arity, step):
    """Export a canonical coefficient table as JSON."""
    started = time.perf_counter()
    try:
        if kind == "beta":
            if n_factors is None:
                raise click.UsageError("--n is required for beta tables")
            table = beta_table(n_factors, step, work_cap())
            token = f"beta:{n_factors}:{step}"
        else:
            if arity is None:
                raise click.UsageError("--j is required for gamma tables")
            table = gamma_table(arity, step)
            token = f"gamma:{arity}:{step}"
        payload = table.to_json_dict()
    except (CarnotError, OSError) as exc:
        _fail(exc)
    _emit(ctx, "bch tables", payload, _digest(token), started)


if __name__ == "__main__":
    main()
