"""Built-in frame models: Heisenberg baseline, tangent sphere bundle family, (n, kappa, mu) models.

Frame convention for every catalog model: index 0 is xi, indices 1..n carry
h-eigenvalue +lambda, indices n+1..2n carry -lambda, phi e_i = e_{i+n} for
1 <= i <= n, and the frame is orthonormal.

For n >= 2 the models are homogeneous spaces g = m + so(n): the trailing
generators E_ab (a < b) form so(n), acting on both the X-block and the
Y-block by the standard representation.  The unknown structure constants of
the family are

    [xi, X_i] = u0 Y_i,  [xi, Y_i] = u1 X_i,  [X_i, Y_i] = 2 xi,
    [X_a, X_b] = w1 E_ab,  [Y_a, Y_b] = w2 E_ab,

with everything else fixed by the so(n) action.  The synthesizer solves for
(u0, u1, w1, w2); models in the catalog were produced that way and frozen.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import combinations

import numpy as np

from .backend import ScalarBackend, parse_scalar, rational_sqrt
from .frame import FrameManifold, default_labels
from .structures import StructurePack

PROVENANCES = ("closed-form", "synthesized", "user-file", "constructed")


@dataclass(frozen=True)
class ModelDescriptor:
    name: str
    parameters: dict
    provenance: str
    manifold: FrameManifold
    pack: StructurePack
    claims: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)

    @property
    def backend(self) -> ScalarBackend:
        return self.pack.backend

    def describe(self) -> dict:
        return {
            "name": self.name,
            "parameters": {k: _fmt(v) for k, v in self.parameters.items()},
            "provenance": self.provenance,
            "dim": self.manifold.dim,
            "isotropy": self.manifold.isotropy,
            "kind": self.pack.kind,
            "scalars": "rational" if self.backend.exact else "float",
        }


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def isotropy_pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


def family_brackets(n: int, params, backend: ScalarBackend) -> np.ndarray:
    """Structure constants of the (u0, u1, w1, w2) family.  ``params`` has 2 entries for n = 1."""
    u0, u1 = params[0], params[1]
    w1, w2 = (params[2], params[3]) if n >= 2 else (0, 0)
    d = 2 * n + 1
    pairs = isotropy_pairs(n)
    D = d + len(pairs)
    dtype = object if backend.exact else float
    C = backend.zeros((D, D, D)) if backend.exact else np.zeros((D, D, D), dtype=dtype)
    two = backend.scalar(2)
    one = backend.scalar(1)

    def put(i, j, k, v):
        C[i, j, k] = C[i, j, k] + v
        C[j, i, k] = C[j, i, k] - v

    for i in range(n):
        X, Y = 1 + i, 1 + n + i
        put(0, X, Y, u0)
        put(0, Y, X, u1)
        put(X, Y, 0, two)
    gens = {}
    for p, (a, b) in enumerate(pairs):
        E = d + p
        put(1 + a, 1 + b, E, w1)
        put(1 + n + a, 1 + n + b, E, w2)
        R = np.zeros((n, n), dtype=int)
        R[a, b], R[b, a] = 1, -1
        gens[p] = R
        for start in (1, 1 + n):
            for c in range(n):
                for e in range(n):
                    if R[e, c]:
                        put(E, start + c, start + e, one * int(R[e, c]))
    for p, q in combinations(range(len(pairs)), 2):
        K = gens[p] @ gens[q] - gens[q] @ gens[p]
        for r, (e, f) in enumerate(pairs):
            if K[e, f]:
                put(d + p, d + q, d + r, one * int(K[e, f]))
    return C


def standard_pack(n: int, backend: ScalarBackend) -> StructurePack:
    d = 2 * n + 1
    phi = backend.zeros((d, d))
    one = backend.scalar(1)
    for i in range(n):
        phi[1 + n + i, 1 + i] = one
        phi[1 + i, 1 + n + i] = -one
    xi = backend.zeros(d)
    xi[0] = one
    return StructurePack("contact", phi, xi, xi.copy(), backend.eye(d), backend)


def family_model(n: int, params, backend: ScalarBackend) -> tuple[FrameManifold, StructurePack]:
    C = family_brackets(n, params, backend)
    m = FrameManifold(C, 2 * n + 1, backend, default_labels(n, len(isotropy_pairs(n))))
    return m, standard_pack(n, backend)


def model_heisenberg(n: int, backend: ScalarBackend | None = None) -> ModelDescriptor:
    """Two-step nilpotent Sasakian model: [X_i, phi X_i] = 2 xi."""
    if n < 1:
        raise ValueError("n must be at least 1")
    backend = backend or ScalarBackend()
    d = 2 * n + 1
    C = backend.zeros((d, d, d))
    two = backend.scalar(2)
    for i in range(n):
        C[1 + i, 1 + n + i, 0] = two
        C[1 + n + i, 1 + i, 0] = -two
    m = FrameManifold(C, d, backend)
    return ModelDescriptor(
        f"heisenberg-{d}",
        {"n": n},
        "closed-form",
        m,
        standard_pack(n, backend),
        claims={"kappa": backend.scalar(1), "mu": None},
    )


def t1n_constants(c) -> tuple:
    """kappa = c(2-c), mu = -2c for the unit tangent bundle of curvature c."""
    return c * (2 - c), -2 * c


def t1n_invariant(c):
    return (1 + c) / abs(1 - c)


# -- frozen catalog ---------------------------------------------------------

@lru_cache(maxsize=1)
def _frozen_entries() -> tuple[dict, ...]:
    text = resources.files("kappamu").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return tuple(json.loads(text)["models"])


def frozen_catalog() -> list[dict]:
    """Entries of the committed catalog: parameters, bracket constants and certificates."""
    try:
        return [dict(e) for e in _frozen_entries()]
    except FileNotFoundError:
        return []


def _lookup(n: int, kappa, mu) -> dict | None:
    for entry in frozen_catalog():
        if (entry["n"] == n and parse_scalar(entry["kappa"]) == kappa
                and parse_scalar(entry["mu"]) == mu):
            return entry
    return None


def model_kappa_mu(n: int, kappa, mu, backend: ScalarBackend | None = None,
                   name: str | None = None, budget: int = 200) -> ModelDescriptor:
    """Frame model with nullity constants (kappa, mu): frozen catalog first, solver otherwise."""
    from .synth import synthesize_brackets

    backend = backend or ScalarBackend()
    kappa, mu = _coerce(kappa, backend), _coerce(mu, backend)
    if not kappa < 1:
        raise ValueError(f"(kappa,mu)-models need kappa < 1, got {kappa}")
    entry = _lookup(n, kappa, mu) if isinstance(kappa, Fraction) and isinstance(mu, Fraction) else None
    name = name or f"kmu-n{n}-k{kappa}-m{mu}"
    if entry is not None:
        exact_ok = backend.exact and entry["scalars"] == "rational"
        bk = backend if exact_ok or not backend.exact else backend.as_float()
        params = [parse_scalar(v) for v in entry["params"]]
        if not bk.exact:
            params = [float(v) for v in params]
        m, p = family_model(n, params, bk)
        return ModelDescriptor(name, {"n": n, "kappa": kappa, "mu": mu}, "synthesized", m, p,
                               claims={"kappa": kappa, "mu": mu},
                               certificate=dict(entry.get("certificate", {}), frozen=True))
    desc = synthesize_brackets(n, kappa, mu, backend=backend, budget=budget)
    return ModelDescriptor(name, desc.parameters, desc.provenance, desc.manifold, desc.pack,
                           desc.claims, desc.certificate)


def model_t1n(c, n: int = 1, backend: ScalarBackend | None = None) -> ModelDescriptor:
    """Homogeneous model with the nullity constants of T_1 N(c).

    c = 0 (I = 1) is constructible; the canonical-metric gates refuse it.
    """
    backend = backend or ScalarBackend()
    c = _coerce(c, backend)
    if c == 1:
        raise ValueError("c = 1 gives a Sasakian space, not a (kappa,mu)-space")
    kappa, mu = t1n_constants(c)
    desc = model_kappa_mu(n, kappa, mu, backend=backend, name=f"t1n(c={c})" + (f",n={n}" if n > 1 else ""))
    params = {"c": c, "n": n, "kappa": kappa, "mu": mu}
    return ModelDescriptor(desc.name, params, desc.provenance, desc.manifold, desc.pack,
                           desc.claims, desc.certificate)


def _coerce(x, backend: ScalarBackend):
    x = parse_scalar(x) if not isinstance(x, (Fraction, float)) else x
    if isinstance(x, float) and backend.exact:
        return Fraction(x) if x.is_integer() else x
    return x



# -- freezing -----------------------------------------------------------------

T1N_FROZEN_C = ("2", "-1", "-3", "-2", "-1/2", "1/2", "3", "4", "1/3", "7/5", "-25/16", "25/16", "0", "9/16", "3/2",
                "-1/16")
N2_FROZEN_C = ("2", "-1", "1/2", "-9/16", "25/16")
N2_FROZEN_KM = (("207/256", "-9/8"), ("175/256", "-25/8"), ("16/25", "4"))
N1_FROZEN_KM = (("-5/4", "-3"), ("3/4", "2"))


def frozen_targets() -> list[tuple[int, Fraction, Fraction]]:
    """(n, kappa, mu) of every model shipped in data/catalog.json, in file order."""
    out = [(1, *t1n_constants(parse_scalar(c))) for c in T1N_FROZEN_C]
    out += [(2, *t1n_constants(parse_scalar(c))) for c in N2_FROZEN_C]
    out += [(2, parse_scalar(k), parse_scalar(m)) for k, m in N2_FROZEN_KM]
    out += [(1, parse_scalar(k), parse_scalar(m)) for k, m in N1_FROZEN_KM]
    return list(dict.fromkeys(out))


def freeze_entry(n: int, kappa, mu) -> dict:
    """Synthesize and certify one model and return its catalog entry."""
    from .synth import synthesize_brackets

    desc = synthesize_brackets(n, kappa, mu, backend=ScalarBackend())
    cert = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in desc.certificate.items()}
    return {
        "n": n,
        "kappa": str(kappa),
        "mu": str(mu),
        "scalars": cert["scalars"],
        "params": [str(v) if isinstance(v, Fraction) else v for v in desc.parameters["params"]],
        "certificate": cert,
    }


def freeze_catalog(path) -> list[dict]:
    """Regenerate the frozen catalog file from :func:`frozen_targets`."""
    entries = [freeze_entry(*t) for t in frozen_targets()]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"models": entries}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _frozen_entries.cache_clear()
    return entries
