"""Model files: JSON load/save with field diagnostics and re-verification on load.

Schema (UTF-8 JSON object):

    dim        odd int, tangent dimension
    n          int, (dim - 1) / 2
    kind       "contact" | "paracontact"
    scalars    "rational" (entries are "p/q" strings or ints) | "float" (numbers)
    brackets   D x D x D array, C[i][j][k] = k-th component of [e_i, e_j], D >= dim
    metric     dim x dim
    phi        dim x dim
    xi, eta    dim
    claims     {"kappa": value | null, "mu": value | null}

Optional: name, provenance, parameters, labels, certificate.  Generators past
``dim`` are isotropy generators.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .backend import ScalarBackend, format_scalar
from .catalog import ModelDescriptor, PROVENANCES
from .frame import FrameManifold
from .nullity import pipeline
from .report import VerificationReport, _jsonable
from .structures import KINDS, StructurePack, validate_structure

REQUIRED = ("dim", "n", "kind", "scalars", "brackets", "metric", "phi", "xi", "eta", "claims")
OPTIONAL = ("name", "provenance", "parameters", "labels", "certificate")


class ModelFileError(ValueError):
    """Schema violation; the message names the offending field (and line for JSON syntax)."""

    def __init__(self, field: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}field {field!r}: {message}")
        self.field = field
        self.line = line


def _scalar(value, scalars: str, field: str):
    if isinstance(value, bool) or value is None:
        raise ModelFileError(field, f"expected a number, got {value!r}")
    if scalars == "rational":
        if isinstance(value, float):
            raise ModelFileError(field, f"float {value!r} in a rational file (mixing rational and float)")
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            try:
                return Fraction(value.strip())
            except (ValueError, ZeroDivisionError):
                raise ModelFileError(field, f"not a rational number: {value!r}") from None
        raise ModelFileError(field, f"expected a rational, got {type(value).__name__}")
    if isinstance(value, str):
        raise ModelFileError(field, f"string {value!r} in a float file (mixing rational and float)")
    if isinstance(value, (int, float)):
        return float(value)
    raise ModelFileError(field, f"expected a number, got {type(value).__name__}")


def _array(value, shape: tuple[int, ...], scalars: str, field: str) -> np.ndarray:
    def walk(v, depth, path):
        if depth == len(shape):
            return _scalar(v, scalars, path)
        if not isinstance(v, list):
            raise ModelFileError(path, f"expected a list at depth {depth}")
        if len(v) != shape[depth]:
            raise ModelFileError(path, f"expected length {shape[depth]}, got {len(v)}")
        return [walk(x, depth + 1, f"{path}[{i}]") for i, x in enumerate(v)]

    data = walk(value, 0, field)
    out = np.empty(shape, dtype=object if scalars == "rational" else float)
    out[...] = np.array(data, dtype=object) if shape else data
    return out


def _bracket_size(value) -> int:
    if not isinstance(value, list) or not value:
        raise ModelFileError("brackets", "expected a non-empty 3-index array")
    return len(value)


def parse_model(doc: dict, backend: ScalarBackend | None = None, source: str = "<dict>") -> ModelDescriptor:
    """Build a descriptor from a decoded model document (no verification)."""
    if not isinstance(doc, dict):
        raise ModelFileError("<root>", "expected a JSON object")
    for key in REQUIRED:
        if key not in doc:
            raise ModelFileError(key, "missing required field")
    unknown = sorted(set(doc) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        raise ModelFileError(unknown[0], "unknown field")
    dim, n = doc["dim"], doc["n"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1 or dim % 2 != 1:
        raise ModelFileError("dim", f"expected an odd positive integer, got {dim!r}")
    if n != (dim - 1) // 2:
        raise ModelFileError("n", f"expected {(dim - 1) // 2} for dim {dim}, got {n!r}")
    if doc["kind"] not in KINDS:
        raise ModelFileError("kind", f"expected one of {KINDS}, got {doc['kind']!r}")
    scalars = doc["scalars"]
    if scalars not in ("rational", "float"):
        raise ModelFileError("scalars", f"expected 'rational' or 'float', got {scalars!r}")
    tol = backend.tolerance if backend is not None else None
    bk = ScalarBackend("exact" if scalars == "rational" else "float", *(() if tol is None else (tol,)))
    D = _bracket_size(doc["brackets"])
    if D < dim:
        raise ModelFileError("brackets", f"needs at least {dim} generators, got {D}")
    C = _array(doc["brackets"], (D, D, D), scalars, "brackets")
    g = _array(doc["metric"], (dim, dim), scalars, "metric")
    phi = _array(doc["phi"], (dim, dim), scalars, "phi")
    xi = _array(doc["xi"], (dim,), scalars, "xi")
    eta = _array(doc["eta"], (dim,), scalars, "eta")
    claims = doc["claims"]
    if not isinstance(claims, dict) or set(claims) - {"kappa", "mu"}:
        raise ModelFileError("claims", "expected an object with keys kappa, mu")
    parsed_claims = {k: (None if claims.get(k) is None else _scalar(claims[k], scalars, f"claims.{k}"))
                     for k in ("kappa", "mu")}
    labels = tuple(doc.get("labels", ()))
    try:
        m = FrameManifold(C, dim, bk, labels)
    except ValueError as exc:
        raise ModelFileError("brackets", str(exc)) from None
    p = StructurePack(doc["kind"], phi, xi, eta, g, bk)
    provenance = doc.get("provenance", "user-file")
    if provenance not in PROVENANCES:
        raise ModelFileError("provenance", f"expected one of {PROVENANCES}, got {provenance!r}")
    return ModelDescriptor(doc.get("name", Path(source).stem), dict(doc.get("parameters", {})), provenance,
                           m, p, claims=parsed_claims, certificate=dict(doc.get("certificate", {})))


def verification_report(desc: ModelDescriptor) -> VerificationReport:
    """Jacobi, structure axioms and, when claimed, the nullity fit."""
    m, p = desc.manifold, desc.pack
    bk = p.backend
    rep = VerificationReport(f"model {desc.name}", provenance=desc.describe())
    rep.check("Jacobi identity", "[[X,Y],Z] + cyclic = 0", m.jacobi_residual(), bk.tol)
    rep.extend(validate_structure(p, m), prefix="structure: ")
    _, _, _, cert = pipeline(p, m)
    rep.data["certificate"] = cert.to_dict()
    claims = desc.claims or {}
    if claims.get("kappa") is not None or claims.get("mu") is not None:
        rep.check("nullity condition", "R(X,Y)xi = kappa(eta(Y)X - eta(X)Y) + mu(eta(Y)hX - eta(X)hY)",
                  cert.residual, cert.tolerance)
        for key in ("kappa", "mu"):
            want = claims.get(key)
            got = getattr(cert, key)
            if want is None:
                continue
            if got is None:
                rep.boolean(f"claimed {key}", f"{key} = {format_scalar(want)}", False, "not determined")
            else:
                rep.check(f"claimed {key}", f"{key} = {format_scalar(want)}", abs(got - want), bk.tol)
    return rep


def load_model(path, backend: ScalarBackend | None = None) -> tuple[ModelDescriptor, VerificationReport]:
    """Read and re-verify a model file.  A failing verification is reported, not raised."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError("<json>", exc.msg, exc.lineno) from None
    desc = parse_model(doc, backend, str(path))
    return desc, verification_report(desc)


def model_document(desc: ModelDescriptor) -> dict:
    m, p = desc.manifold, desc.pack
    out = {
        "name": desc.name,
        "provenance": desc.provenance,
        "parameters": _jsonable(desc.parameters),
        "dim": m.dim,
        "n": m.n,
        "kind": p.kind,
        "scalars": "rational" if p.backend.exact else "float",
        "brackets": _jsonable(m.brackets),
        "metric": _jsonable(p.g),
        "phi": _jsonable(p.phi),
        "xi": _jsonable(p.xi),
        "eta": _jsonable(p.eta),
        "labels": list(m.labels),
        "claims": {k: (None if (desc.claims or {}).get(k) is None else format_scalar(desc.claims[k]))
                   for k in ("kappa", "mu")},
    }
    if desc.certificate:
        out["certificate"] = _jsonable(desc.certificate)
    return out


def save_model(desc: ModelDescriptor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_document(desc), fh, indent=1, sort_keys=True)
        fh.write("\n")


def descriptor_from_pack(name: str, m: FrameManifold, p: StructurePack, parameters: dict,
                         certificate: dict | None = None) -> ModelDescriptor:
    """Wrap a constructed pack for saving; claims are the fitted constants."""
    _, _, _, cert = pipeline(p, m)
    claims = {"kappa": cert.kappa if cert.is_kmu else None, "mu": cert.mu if cert.is_kmu else None}
    return ModelDescriptor(name, parameters, "constructed", m, p, claims=claims,
                           certificate=certificate if certificate is not None else cert.to_dict())


__all__ = [
    "ModelFileError",
    "parse_model",
    "verification_report",
    "load_model",
    "model_document",
    "save_model",
    "descriptor_from_pack",
]
