"""Almost contact and paracontact metric structures on frame models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import IrrationalRootError, ScalarBackend, rational_sqrt
from .frame import (
    FrameManifold,
    bracket_closure_residual,
    exterior_derivative_oneform,
    lie_derivative_endo,
)
from .report import VerificationReport

KINDS = ("contact", "paracontact")


@dataclass(frozen=True)
class StructurePack:
    """Constant frame components of (phi, xi, eta, g) and the structure kind."""

    kind: str
    phi: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    g: np.ndarray
    backend: ScalarBackend

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        bk = self.backend
        for name in ("phi", "xi", "eta", "g"):
            object.__setattr__(self, name, bk.cast(np.asarray(getattr(self, name))))
        d = self.xi.shape[0]
        if d % 2 != 1:
            raise ValueError(f"dimension must be odd, got {d}")
        if self.phi.shape != (d, d) or self.g.shape != (d, d) or self.eta.shape != (d,):
            raise ValueError(
                "dimension mismatch: "
                f"phi {self.phi.shape}, xi {self.xi.shape}, eta {self.eta.shape}, g {self.g.shape}"
            )

    @property
    def dim(self) -> int:
        return self.xi.shape[0]

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    @property
    def sign(self) -> int:
        """-1 for contact (phi^2 = -I + ...), +1 for paracontact."""
        return -1 if self.kind == "contact" else 1

    def fundamental_form(self) -> np.ndarray:
        """Phi(e_i, e_j) = g(e_i, phi e_j)."""
        return self.g @ self.phi

    def cast(self, backend: ScalarBackend) -> "StructurePack":
        if backend == self.backend:
            return self
        return StructurePack(
            self.kind,
            backend.cast(self.phi),
            backend.cast(self.xi),
            backend.cast(self.eta),
            backend.cast(self.g),
            backend,
        )

    def replace(self, **changes) -> "StructurePack":
        fields = dict(kind=self.kind, phi=self.phi, xi=self.xi, eta=self.eta, g=self.g, backend=self.backend)
        fields.update(changes)
        return StructurePack(**fields)


def _compatible(m: FrameManifold, p: StructurePack) -> tuple[FrameManifold, StructurePack]:
    """Bring a model and a pack into a common backend (float wins)."""
    if m.dim != p.dim:
        raise ValueError(f"dimension mismatch: manifold {m.dim}, pack {p.dim}")
    if m.backend == p.backend:
        return m, p
    bk = m.backend if not m.backend.exact else p.backend
    return m.cast(bk), p.cast(bk)


def validate_structure(p: StructurePack, m: FrameManifold) -> VerificationReport:
    """Per-axiom residuals for an (almost) contact or paracontact metric structure."""
    m, p = _compatible(m, p)
    bk = p.backend
    d, n = p.dim, p.n
    eye = bk.eye(d)
    exi = np.outer(p.xi, p.eta)  # eta (x) xi as an endomorphism
    ee = np.outer(p.eta, p.eta)
    rep = VerificationReport(f"{p.kind} structure axioms")
    tol = bk.tol
    s = p.sign
    rep.check("phi squared", f"phi^2 = {'-' if s < 0 else ''}I {'+' if s < 0 else '-'} eta(x)xi",
              bk.max_abs(p.phi @ p.phi - s * (eye - exi)), tol)
    rep.check("eta(xi) = 1", "eta(xi) = 1", abs(p.eta @ p.xi - 1), tol)
    rep.check("phi xi = 0", "phi xi = 0", bk.max_abs(p.phi @ p.xi), tol)
    rep.check("eta phi = 0", "eta o phi = 0", bk.max_abs(p.eta @ p.phi), tol)
    rep.check("metric symmetric", "g symmetric", bk.max_abs(p.g - p.g.T), tol)
    compat = p.phi.T @ p.g @ p.phi + s * (p.g - ee)
    rep.check("compatible metric",
              "g(phi X, phi Y) = g(X,Y) - eta(X)eta(Y)" if s < 0 else "g(phi X, phi Y) = -g(X,Y) + eta(X)eta(Y)",
              bk.max_abs(compat), tol)
    rep.check("xi dual to eta", "g(X, xi) = eta(X)", bk.max_abs(p.g @ p.xi - p.eta), tol)
    sig = bk.signature(p.g)
    want = (0, d) if p.kind == "contact" else (n, n + 1)
    rep.boolean("signature", f"signature {want}", sig == want, f"found {sig}")
    rep.data["signature"] = list(sig)
    if p.kind == "paracontact":
        plus = bk.nullspace(p.phi - eye).shape[1]
        minus = bk.nullspace(p.phi + eye).shape[1]
        rep.boolean("eigendistribution dimensions", "dim D+ = dim D- = n", plus == n and minus == n,
                    f"dim D+ = {plus}, dim D- = {minus}")
    deta = exterior_derivative_oneform(m, p.eta)
    rep.check("associated metric", "d eta(X,Y) = g(X, phi Y)", bk.max_abs(deta - p.fundamental_form()), tol)
    if m.isotropy:
        acts = m.isotropy_action()
        worst = bk.tol * 0
        for A in acts:
            worst = max(worst, bk.max_abs(A @ p.phi - p.phi @ A), bk.max_abs(A @ p.xi),
                        bk.max_abs(p.eta @ A), bk.max_abs(A.T @ p.g + p.g @ A))
        rep.check("isotropy invariance", "tensors invariant under the isotropy action", worst, tol)
    return rep


@dataclass(frozen=True)
class HOperator:
    """h = 1/2 L_xi phi with its eigen-splitting.

    ``lam`` is the eigenvalue on ``plus`` (``None`` if h^2 is not a multiple
    of phi^2).  Bases are columns; ``plus``/``minus`` are empty when h = 0.
    """

    h: np.ndarray
    lam: object
    plus: np.ndarray
    minus: np.ndarray
    residuals: dict
    backend: ScalarBackend

    @property
    def vanishes(self) -> bool:
        return self.lam is not None and self.lam == 0


def compute_h(p: StructurePack, m: FrameManifold) -> HOperator:
    m, p = _compatible(m, p)
    bk = p.backend
    h = lie_derivative_endo(m, p.xi, p.phi) * bk.half()
    residuals = h_invariant_residuals(p, h)
    d = p.dim
    # h^2 = c * (sign * phi^2) with sign * phi^2 the identity on ker eta
    base = p.sign * (p.phi @ p.phi)
    trace_base = np.trace(base)
    c = np.trace(h @ h) / trace_base
    residuals["h^2 proportional to phi^2"] = bk.max_abs(h @ h - c * base)
    empty = bk.zeros((d, 0))
    lam = None
    plus = minus = empty
    if bk.max_abs(h) <= bk.tol:
        lam = bk.scalar(0)
    elif residuals["h^2 proportional to phi^2"] <= bk.tol and c > 0:
        hb = bk
        r = rational_sqrt(c) if bk.exact else None
        if bk.exact and r is None:
            hb = bk.as_float()
            lam = float(c) ** 0.5
        else:
            lam = r if bk.exact else max(float(c), 0.0) ** 0.5
        hh = hb.cast(h)
        eye = hb.eye(d)
        plus = _split_basis(hb, hh, lam, eye)
        minus = _split_basis(hb, hh, -lam, eye)
    return HOperator(h, lam, plus, minus, residuals, bk)


def _split_basis(bk: ScalarBackend, h, lam, eye):
    if bk.exact:
        return bk.nullspace(h - lam * eye)
    w, v = np.linalg.eig(h.astype(float))
    pick = np.abs(w - lam) < 1e-7
    basis = np.real(v[:, pick])
    q, _ = np.linalg.qr(basis)
    return q[:, : basis.shape[1]]


def h_invariant_residuals(p: StructurePack, h: np.ndarray) -> dict:
    bk = p.backend
    return {
        "h xi = 0": bk.max_abs(h @ p.xi),
        "trace h = 0": abs(np.trace(h)),
        "h is g-symmetric": bk.max_abs(p.g @ h - h.T @ p.g),
        "h anticommutes with phi": bk.max_abs(h @ p.phi + p.phi @ h),
    }


def h_report(hop: HOperator) -> VerificationReport:
    rep = VerificationReport("h-operator invariants")
    for name, r in hop.residuals.items():
        rep.check(name, name, r, hop.backend.tol)
    return rep


def nijenhuis(m: FrameManifold, A: np.ndarray) -> np.ndarray:
    """[A,A](e_i,e_j) = A^2[e_i,e_j] + [Ae_i,Ae_j] - A[Ae_i,e_j] - A[e_i,Ae_j]; out[i, j, :]."""
    C = m.tangent_brackets
    A2 = A @ A
    t1 = np.einsum("ijl,kl->ijk", C, A2)
    t2 = np.einsum("ai,bj,abk->ijk", A, A, C)
    CA = np.einsum("ai,ajl->ijl", A, C)  # [A e_i, e_j]
    t3 = np.einsum("ijl,kl->ijk", CA, A)
    CB = np.einsum("bj,ibl->ijl", A, C)  # [e_i, A e_j]
    t4 = np.einsum("ijl,kl->ijk", CB, A)
    return t1 + t2 - t3 - t4


def normality_tensor(p: StructurePack, m: FrameManifold) -> np.ndarray:
    """N = [phi,phi] + 2 d eta (x) xi (contact) or - 2 d eta (x) xi (paracontact)."""
    m, p = _compatible(m, p)
    deta = exterior_derivative_oneform(m, p.eta)
    s = 1 if p.kind == "contact" else -1
    return nijenhuis(m, p.phi) + 2 * s * np.einsum("ij,k->ijk", deta, p.xi)


def eigendistributions(p: StructurePack) -> tuple[np.ndarray, np.ndarray]:
    """Bases of the +1 and -1 eigendistributions of a paracontact phi."""
    bk = p.backend
    eye = bk.eye(p.dim)
    if bk.exact:
        return bk.nullspace(p.phi - eye), bk.nullspace(p.phi + eye)
    return _split_basis(bk, p.phi, 1.0, eye), _split_basis(bk, p.phi, -1.0, eye)


def para_normality_by_foliation(p: StructurePack, m: FrameManifold) -> VerificationReport:
    """Normality via integrability of D+ and D- and xi being foliated."""
    if p.kind != "paracontact":
        raise ValueError("para-normality applies to paracontact packs only")
    m, p = _compatible(m, p)
    bk = p.backend
    plus, minus = eigendistributions(p)
    n = p.n
    if plus.shape[1] != n or minus.shape[1] != n:
        raise ValueError(f"eigendistribution dimensions {plus.shape[1]}, {minus.shape[1]} differ from n={n}")
    xi = p.xi.reshape(-1, 1)
    rep = VerificationReport("paracontact normality by foliations")
    rep.check("D+ involutive", "[D+, D+] in D+",
              bracket_closure_residual(m, plus, np.hstack([minus, xi])), bk.tol)
    rep.check("D- involutive", "[D-, D-] in D-",
              bracket_closure_residual(m, minus, np.hstack([plus, xi])), bk.tol)
    P = np.hstack([plus, minus, xi])
    Pinv = bk.inv(P)
    worst_p = worst_m = bk.tol * 0
    for a in range(n):
        cp = Pinv @ m.bracket(p.xi, plus[:, a])
        cm = Pinv @ m.bracket(p.xi, minus[:, a])
        worst_p = max(worst_p, bk.max_abs(cp[n:]))
        worst_m = max(worst_m, bk.max_abs(np.concatenate([cm[:n], cm[2 * n:]])))
    rep.check("xi foliated on D+", "[xi, D+] in D+", worst_p, bk.tol)
    rep.check("xi foliated on D-", "[xi, D-] in D-", worst_m, bk.tol)
    N = bk.max_abs(normality_tensor(p, m))
    rep.boolean(
        "agrees with normality tensor",
        "N = 0 iff foliated",
        (N <= bk.tol) == all(c.passed for c in rep.checks),
        f"max |N| = {N}",
    )
    rep.data["normality_residual"] = N
    return rep


def orthonormalize(bk: ScalarBackend, basis: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt for a basis on which ``g`` is definite (either sign).

    Exact mode keeps vectors orthogonal but only normalizes when the norm is
    a rational square; first nonzero component is made positive.
    """
    cols = []
    for k in range(basis.shape[1]):
        v = basis[:, k].copy()
        for u in cols:
            v = v - (u @ g @ v) / (u @ g @ u) * u
        nrm = abs(v @ g @ v)
        if bk.exact:
            r = rational_sqrt(nrm)
            if r is not None:
                v = v / r
        else:
            v = v / np.sqrt(nrm)
        nz = next(x for x in v if not bk.is_zero(x))
        if nz < 0:
            v = -v
        cols.append(v)
    if not cols:
        return bk.zeros((basis.shape[0], 0))
    return np.stack(cols, axis=1)


__all__ = [
    "StructurePack",
    "HOperator",
    "validate_structure",
    "compute_h",
    "normality_tensor",
    "para_normality_by_foliation",
    "eigendistributions",
    "orthonormalize",
    "IrrationalRootError",
]
