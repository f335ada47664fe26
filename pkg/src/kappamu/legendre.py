"""Legendre foliations: Pang invariant, Libermann map, and the converse constructions.

Frame conventions as in :mod:`kappamu.frame`; a foliation is given by the
columns of a basis matrix whose span is bracket-closed inside ker eta.

    Pang form     Pi(X, X') = 2 d eta([xi, X], X')
    Libermann     Pi(Lambda Z, X) = d eta(Z, X),  Lambda = B Pi^-1 B^T d eta^T
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import ScalarBackend, is_exact_array, roots_backend
from .frame import (
    ConnectionCoefficients,
    FrameManifold,
    bracket_closure_residual,
    exterior_derivative_oneform,
    koszul_connection,
)
from .nullity import GateError, NullityCertificate, convert_scalar, pipeline
from .report import VerificationReport
from .structures import HOperator, StructurePack, _compatible, compute_h, validate_structure

CLASSIFICATIONS = ("nondegenerate", "degenerate", "flat")
PANG_TOLERANCE_FACTOR = 10


class LegendreError(ValueError):
    """The supplied subspace is not a Legendre foliation."""


@dataclass(frozen=True)
class LegendreFoliationData:
    basis: np.ndarray
    pang: np.ndarray
    classification: str
    libermann: np.ndarray | None = None


def complete_basis(bk: ScalarBackend, B: np.ndarray) -> np.ndarray:
    """Frame vectors e_k (in index order) extending the columns of B to a basis."""
    d = B.shape[0]
    eye = bk.eye(d)
    cols = [B[:, a] for a in range(B.shape[1])]
    rank = bk.rank(np.stack(cols, axis=1)) if cols else 0
    extra = []
    for k in range(d):
        trial = np.stack(cols + extra + [eye[:, k]], axis=1)
        r = bk.rank(trial)
        if r > rank:
            extra.append(eye[:, k])
            rank = r
    if not extra:
        return bk.zeros((d, 0))
    return np.stack(extra, axis=1)


def _coords(bk: ScalarBackend, B: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of v along B and along the complement from :func:`complete_basis`."""
    comp = complete_basis(bk, B)
    P = np.hstack([B, comp])
    c = bk.inv(P) @ v
    return c[: B.shape[1]], c[B.shape[1]:]


def legendre_residuals(m: FrameManifold, eta: np.ndarray, basis: np.ndarray) -> dict:
    bk = m.backend
    deta = exterior_derivative_oneform(m, eta)
    comp = complete_basis(bk, basis)
    return {
        "in ker eta": bk.max_abs(eta @ basis),
        "d eta vanishes on TF": bk.max_abs(basis.T @ deta @ basis),
        "involutive": bracket_closure_residual(m, basis, comp),
    }


def pang_form(m: FrameManifold, eta: np.ndarray, xi: np.ndarray, basis: np.ndarray,
              check: bool = True) -> tuple[np.ndarray, str]:
    """Pi(X_i, X_j) = 2 d eta([xi, X_i], X_j) and its Pang classification."""
    bk = m.backend
    if check:
        bad = {k: v for k, v in legendre_residuals(m, eta, basis).items() if v > bk.tol}
        if bad:
            raise LegendreError(f"basis is not Legendre: {bad}")
    deta = exterior_derivative_oneform(m, eta)
    adxi = np.einsum("i,ijk->kj", xi, m.tangent_brackets)
    Pi = 2 * (adxi @ basis).T @ deta @ basis
    return Pi, classify(bk, Pi)


def classify(bk: ScalarBackend, Pi: np.ndarray) -> str:
    if bk.max_abs(Pi) <= bk.tol:
        return "flat"
    return "nondegenerate" if bk.rank(Pi) == Pi.shape[0] else "degenerate"


def legendre_foliation(m: FrameManifold, eta: np.ndarray, xi: np.ndarray, basis: np.ndarray) -> LegendreFoliationData:
    Pi, cls = pang_form(m, eta, xi, basis)
    lib = libermann_map(m, eta, xi, basis, Pi) if cls == "nondegenerate" else None
    return LegendreFoliationData(basis, Pi, cls, lib)


def libermann_map(m: FrameManifold, eta: np.ndarray, xi: np.ndarray, basis: np.ndarray,
                  pang: np.ndarray | None = None) -> np.ndarray:
    """Matrix of Lambda_F: TM -> TF with Pi(Lambda Z, X) = d eta(Z, X) for X in TF."""
    bk = m.backend
    if pang is None:
        pang, cls = pang_form(m, eta, xi, basis)
    else:
        cls = classify(bk, pang)
    if cls != "nondegenerate":
        raise LegendreError(f"Libermann map needs a nondegenerate Pang form, got {cls}")
    deta = exterior_derivative_oneform(m, eta)
    return basis @ bk.inv(pang) @ basis.T @ deta.T


def libermann_report(m: FrameManifold, eta: np.ndarray, xi: np.ndarray, basis: np.ndarray,
                     label: str = "F") -> VerificationReport:
    bk = m.backend
    data = legendre_foliation(m, eta, xi, basis)
    rep = VerificationReport(f"Legendre foliation {label}")
    for name, r in legendre_residuals(m, eta, basis).items():
        rep.check(f"Legendre: {name}", name, r, bk.tol)
    rep.check("Pang form symmetric", "Pi(X, X') = Pi(X', X)", bk.max_abs(data.pang - data.pang.T), bk.tol)
    rep.data.update({"classification": data.classification, "pang": data.pang})
    if data.libermann is None:
        return rep
    L = data.libermann
    deta = exterior_derivative_oneform(m, eta)
    rep.check("Lambda defining relation", "Pi(Lambda Z, X) = d eta(Z, X)",
              bk.max_abs(_pang_bilinear(m, eta, xi, L, basis) - deta @ basis), bk.tol)
    rep.check("Lambda^2 = 0", "Lambda^2 = 0", bk.max_abs(L @ L), bk.tol)
    rep.check("Lambda kills TF", "Lambda(TF) = 0", bk.max_abs(L @ basis), bk.tol)
    rep.check("Lambda kills xi", "Lambda xi = 0", bk.max_abs(L @ xi), bk.tol)
    adxi = np.einsum("i,ijk->kj", xi, m.tangent_brackets)
    rep.check("Lambda [xi, X] = X/2", "Lambda [xi, X] = 1/2 X", bk.max_abs(L @ adxi @ basis - basis * bk.half()), bk.tol)
    coords = [_coords(bk, basis, L[:, k])[1] for k in range(L.shape[1])]
    rep.check("Lambda maps into TF", "image of Lambda in TF", max(bk.max_abs(c) for c in coords), bk.tol)
    return rep


def _pang_bilinear(m, eta, xi, L, basis):
    """Pi(L e_k, X_j) as a (dim, k) table: rows Z = e_k."""
    deta = exterior_derivative_oneform(m, eta)
    adxi = np.einsum("i,ijk->kj", xi, m.tangent_brackets)
    return 2 * (adxi @ L).T @ deta @ basis


def totally_geodesic_check(m: FrameManifold, conn: ConnectionCoefficients, basis: np.ndarray,
                           label: str = "F") -> VerificationReport:
    """nabla_X Y in span(basis) for basis X, Y."""
    bk = conn.backend
    basis = bk.cast(basis)
    if bk.rank(basis) != basis.shape[1]:
        raise ValueError("basis vectors are not independent")
    worst = bk.tol * 0
    for a in range(basis.shape[1]):
        for b in range(basis.shape[1]):
            X, Y = basis[:, a], basis[:, b]
            v = np.einsum("i,j,ijk->k", X, Y, conn.gamma)
            worst = max(worst, bk.max_abs(_coords(bk, basis, v)[1]))
    rep = VerificationReport(f"totally geodesic {label}")
    rep.check(f"{label} totally geodesic", "nabla_X Y in TF for X, Y in TF", worst, bk.tol)
    return rep


def _bases(h: HOperator, bk: ScalarBackend):
    if bk.exact and not is_exact_array(h.plus):
        raise TypeError("eigenbases are not exact")
    return bk.cast(h.plus), bk.cast(h.minus)


def pang_vs_canonical_metric(p: StructurePack, m: FrameManifold, h: HOperator,
                             cert: NullityCertificate) -> VerificationReport:
    """Pi on D(+-lambda) against (2-mu +- 2 lambda) g and against the canonical metric."""
    from .canonical import build_canonical

    target, q = build_canonical(p, m, h, cert)
    bk = q.backend
    mm, pp = _compatible(m.cast(bk) if m.backend != bk else m, p.cast(bk) if p.backend != bk else p)
    plus, minus = (bk.cast(h.plus), bk.cast(h.minus)) if is_exact_array(h.plus) == bk.exact else (
        np.asarray(h.plus, dtype=float), np.asarray(h.minus, dtype=float))
    mu, lam = convert_scalar(cert.mu, bk), convert_scalar(cert.lam, bk)
    alpha = convert_scalar(cert.alpha, bk)
    _, (root,) = roots_backend(bk, alpha if target == "sasakian" else -alpha)
    factor = cert.epsilon * root if target == "sasakian" else -root
    tol = bk.tol * max(1, bk.max_abs(q.g)) * PANG_TOLERANCE_FACTOR
    rep = VerificationReport(f"Pang invariants against the {target} metric")
    for label, B, sgn in (("D(lambda)", plus, 1), ("D(-lambda)", minus, -1)):
        Pi, cls = pang_form(mm, pp.eta, pp.xi, B)
        rep.check(f"Pi on {label} vs g", f"Pi = (2-mu {'+' if sgn > 0 else '-'} 2 lambda) g on {label}",
                  bk.max_abs(Pi - (2 - mu + 2 * sgn * lam) * (B.T @ pp.g @ B)), tol)
        anchor = (f"Pi = eps sqrt(alpha) gbar on {label}" if target == "sasakian"
                  else f"Pi = -sqrt(-alpha) gtil on {label}")
        rep.check(f"Pi on {label} vs canonical metric", anchor, bk.max_abs(Pi - factor * (B.T @ q.g @ B)), tol)
        rep.boolean(f"{label} nondegenerate", "Pi nondegenerate iff I != +-1", cls == "nondegenerate", cls)
    rep.data["factor"] = factor
    return rep


def foliation_suite(p: StructurePack, m: FrameManifold, h: HOperator,
                    cert: NullityCertificate) -> VerificationReport:
    """Libermann invariants and totally-geodesic checks for D(+-lambda) under g and the canonical metric."""
    from .canonical import build_canonical

    target, q = build_canonical(p, m, h, cert)
    bk = q.backend
    mm = m.cast(bk) if m.backend != bk else m
    pp = p.cast(bk) if p.backend != bk else p
    plus, minus = (bk.cast(h.plus), bk.cast(h.minus)) if is_exact_array(h.plus) == bk.exact else (
        np.asarray(h.plus, dtype=float), np.asarray(h.minus, dtype=float))
    rep = VerificationReport("Legendre foliations D(lambda), D(-lambda)")
    rep.extend(pang_vs_canonical_metric(p, m, h, cert))
    conn_g = koszul_connection(mm, pp.g)
    conn_q = koszul_connection(mm, q.g)
    for label, B in (("D(lambda)", plus), ("D(-lambda)", minus)):
        rep.extend(libermann_report(mm, pp.eta, pp.xi, B, label), prefix=f"{label}: ")
        rep.extend(totally_geodesic_check(mm, conn_g, B, label), prefix="g: ")
        rep.extend(totally_geodesic_check(mm, conn_q, B, label), prefix=f"{target}: ")
    L = libermann_map(mm, pp.eta, pp.xi, plus)
    if target == "sasakian":
        a, b = _ab(cert, bk)
        _, (rab,) = roots_backend(bk, a * b)
        eps = 1 if a > 0 else -1
        want = -eps / rab * _component(bk, q.phi, plus, minus, pp.xi)
        rep.check("Lambda = -eps (phibar Z)_F1 / sqrt(ab)", "Lambda_F1 Z = -eps (1/sqrt(ab)) (phibar Z)_F1",
                  bk.max_abs(L - want), bk.tol * PANG_TOLERANCE_FACTOR)
    return rep


def _component(bk, A, F1, F2, xi):
    """Matrix of Z -> (A Z)_{F1} for the splitting TF1 + TF2 + R xi."""
    P = np.hstack([F1, F2, xi.reshape(-1, 1)])
    k = F1.shape[1]
    proj = P[:, :k] @ bk.inv(P)[:k, :]
    return proj @ A


def _ab(cert: NullityCertificate, bk: ScalarBackend):
    mu, lam = convert_scalar(cert.mu, bk), convert_scalar(cert.lam, bk)
    return 2 - mu + 2 * lam, 2 - mu - 2 * lam


# -- converse constructions ------------------------------------------------------

def _projectors(bk, F1, F2, xi):
    P = np.hstack([F1, F2, xi.reshape(-1, 1)])
    Pinv = bk.inv(P)
    k1, k2 = F1.shape[1], F2.shape[1]
    P1 = P[:, :k1] @ Pinv[:k1, :]
    P2 = P[:, k1:k1 + k2] @ Pinv[k1:k1 + k2, :]
    return P1, P2


def _preconditions(kpack: StructurePack, m: FrameManifold, F1, F2, a, b, para: bool) -> list[tuple[str, bool, str]]:
    """Ordered (diagnostic, ok, detail) list; the first failure is raised."""
    bk = kpack.backend
    out = []
    if a == b:
        out.append(("a = b", False, f"a = b = {a}"))
    if para:
        out.append(("a b >= 0", a * b < 0, f"a b = {a * b}"))
    else:
        out.append(("a b <= 0", a * b > 0, f"a b = {a * b}"))
    hk = compute_h(kpack, m)
    kind = "K-paracontact" if para else "K-contact"
    out.append((f"not {kind}", bk.max_abs(hk.h) <= bk.tol, f"max |h| = {bk.max_abs(hk.h)}"))
    for label, F in (("F1", F1), ("F2", F2)):
        res = legendre_residuals(m, kpack.eta, F)
        bad = {k: v for k, v in res.items() if v > bk.tol}
        out.append((f"{label} not Legendre", not bad, str(bad)))
    orth = bk.max_abs(F1.T @ kpack.g @ F2)
    out.append(("F1, F2 not orthogonal", orth <= bk.tol, f"max |g(F1, F2)| = {orth}"))
    if F1.shape[1] + F2.shape[1] + 1 != kpack.dim:
        out.append(("F1 + F2 + xi is not the tangent space", False, f"{F1.shape[1]} + {F2.shape[1]} + 1"))
    conn = koszul_connection(m, kpack.g)
    for label, F in (("F1", F1), ("F2", F2)):
        tg = totally_geodesic_check(m, conn, F, label)
        out.append((f"{label} not totally geodesic", tg.passed, str(tg.checks[0].residual)))
    return out


def _pang_hypothesis(kpack, m, F1, F2, factor, bk):
    tol = bk.tol * PANG_TOLERANCE_FACTOR * max(1, bk.max_abs(kpack.g))
    worst = bk.tol * 0
    for F in (F1, F2):
        Pi, _ = pang_form(m, kpack.eta, kpack.xi, F, check=False)
        worst = max(worst, bk.max_abs(Pi - factor * (F.T @ kpack.g @ F)))
    return worst, tol


def _prepare(kpack, m, F1, F2, a, b, radicands):
    m, kpack = _compatible(m, kpack)
    bk = kpack.backend
    a, b = convert_scalar(a, bk), convert_scalar(b, bk)
    bk2, roots = roots_backend(bk, *radicands(a, b))
    if bk2 != bk:
        a, b = float(a), float(b)
    F1 = bk2.cast(F1) if is_exact_array(F1) or not bk2.exact else F1
    F2 = bk2.cast(F2) if is_exact_array(F2) or not bk2.exact else F2
    return m.cast(bk2), kpack.cast(bk2), bk2, F1, F2, a, b, roots


def _raise_first(pre):
    for diag, ok, detail in pre:
        if not ok:
            raise GateError(f"{diag}: {detail}")


def reves1_construct(kpack: StructurePack, m: FrameManifold, F1: np.ndarray, F2: np.ndarray,
                     a, b) -> StructurePack:
    """Contact metric (kappa, mu)-structure from a K-contact pack with two Legendre foliations.

    phi = sqrt(b/a) phibar on TF1, sqrt(a/b) phibar on TF2, 0 on xi;
    g = sqrt(b/a) gbar on TF1, sqrt(a/b) gbar on TF2, eta (x) eta otherwise.
    """
    if kpack.kind != "contact":
        raise GateError("not K-contact: pack is paracontact")
    if not (a * b > 0):
        raise GateError(f"a b <= 0: a b = {a * b}")
    m, kpack, bk, F1, F2, a, b, (r1, r2, rab) = _prepare(kpack, m, F1, F2, a, b, lambda a, b: (b / a, a / b, a * b))
    _raise_first(_preconditions(kpack, m, F1, F2, a, b, para=False))
    eps = 1 if a > 0 else -1
    worst, tol = _pang_hypothesis(kpack, m, F1, F2, eps * rab, bk)
    if worst > tol:
        raise GateError(f"Pang mismatch: Pi_F != eps sqrt(ab) g|_F (residual {worst})")
    P1, P2 = _projectors(bk, F1, F2, kpack.xi)
    phi = r1 * (kpack.phi @ P1) + r2 * (kpack.phi @ P2)
    g = r1 * (P1.T @ kpack.g @ P1) + r2 * (P2.T @ kpack.g @ P2) + np.outer(kpack.eta, kpack.eta)
    return StructurePack("contact", phi, kpack.xi, kpack.eta, g, bk)


def reves1_para_construct(kpack: StructurePack, m: FrameManifold, F1: np.ndarray, F2: np.ndarray,
                          a, b) -> StructurePack:
    """Contact metric (kappa, mu)-structure from a K-paracontact pack with two Legendre foliations.

    phi = (sqrt(-ab)/a) phitil on TF1, (sqrt(-ab)/b) phitil on TF2;
    g = -(sqrt(-ab)/a) gtil on TF1, -(sqrt(-ab)/b) gtil on TF2, eta (x) eta otherwise.
    The metric restricted to F1 must have the sign of -a (and to F2 the sign of -b)
    for g to be Riemannian.
    """
    if kpack.kind != "paracontact":
        raise GateError("not K-paracontact: pack is contact")
    if not (a * b < 0):
        raise GateError(f"a b >= 0: a b = {a * b}")
    m, kpack, bk, F1, F2, a, b, (rab,) = _prepare(kpack, m, F1, F2, a, b, lambda a, b: (-a * b,))
    _raise_first(_preconditions(kpack, m, F1, F2, a, b, para=True))
    for label, F, coef in (("F1", F1, a), ("F2", F2, b)):
        neg, pos = bk.signature(F.T @ kpack.g @ F)
        want = (F.shape[1], 0) if coef > 0 else (0, F.shape[1])
        if (neg, pos) != want:
            raise GateError(f"signature violation: metric on {label} has signature {(neg, pos)}, "
                            f"needs sign opposite to {'a' if label == 'F1' else 'b'}")
    worst, tol = _pang_hypothesis(kpack, m, F1, F2, -rab, bk)
    if worst > tol:
        raise GateError(f"Pang mismatch: Pi_F != -sqrt(-ab) g|_F (residual {worst})")
    P1, P2 = _projectors(bk, F1, F2, kpack.xi)
    phi = (rab / a) * (kpack.phi @ P1) + (rab / b) * (kpack.phi @ P2)
    g = -(rab / a) * (P1.T @ kpack.g @ P1) - (rab / b) * (P2.T @ kpack.g @ P2) + np.outer(kpack.eta, kpack.eta)
    return StructurePack("contact", phi, kpack.xi, kpack.eta, g, bk)


def reves1_report(kpack: StructurePack, m: FrameManifold, F1: np.ndarray, F2: np.ndarray, a, b,
                  original: StructurePack | None = None) -> tuple[StructurePack, VerificationReport]:
    """Build the (kappa_ab, mu_ab)-structure and verify it; optionally compare with an original pack."""
    para = kpack.kind == "paracontact"
    q = (reves1_para_construct if para else reves1_construct)(kpack, m, F1, F2, a, b)
    bk = q.backend
    mm = m.cast(bk) if m.backend != bk else m
    a_, b_ = convert_scalar(a, bk), convert_scalar(b, bk)
    F1, F2 = bk.cast(F1) if bk.exact else np.asarray(F1, float), bk.cast(F2) if bk.exact else np.asarray(F2, float)
    tol = bk.tol * max(1, bk.max_abs(q.g))
    rep = VerificationReport("paracontact converse construction" if para else "K-contact converse construction")
    rep.extend(validate_structure(q, mm), prefix="structure: ")
    _, _, hq, cq = pipeline(q, mm)
    kappa_ab = 1 - (a_ - b_) ** 2 / 16
    mu_ab = 2 - (a_ + b_) / 2
    rep.check("nullity condition", "R(X,Y)xi = kappa(...) + mu(...)", cq.residual, tol)
    rep.check("kappa_ab", "kappa = 1 - (a-b)^2/16", abs(convert_scalar(cq.kappa, bk) - kappa_ab), tol)
    if cq.mu is not None:
        rep.check("mu_ab", "mu = 2 - (a+b)/2", abs(convert_scalar(cq.mu, bk) - mu_ab), tol)
    ev = (a_ - b_) / 4
    hh = bk.cast(hq.h)
    rep.check("h on TF1", "h X = ((a-b)/4) X on TF1", bk.max_abs(hh @ F1 - ev * F1), tol)
    rep.check("h on TF2", "h Y = -((a-b)/4) Y on TF2", bk.max_abs(hh @ F2 + ev * F2), tol)
    rep.check("2 - mu + 2 lambda = a", "2 - mu + 2 lambda = a (lambda the h-eigenvalue on TF1)",
              abs(2 - mu_ab + 2 * ev - a_), tol)
    rep.check("2 - mu - 2 lambda = b", "2 - mu - 2 lambda = b", abs(2 - mu_ab - 2 * ev - b_), tol)
    swap = max(bk.max_abs(_coords(bk, F2, q.phi @ F1[:, k])[1]) for k in range(F1.shape[1]))
    swap = max(swap, max(bk.max_abs(_coords(bk, F1, q.phi @ F2[:, k])[1]) for k in range(F2.shape[1])))
    rep.check("phi swaps TF1 and TF2", "phi TF1 in TF2, phi TF2 in TF1", swap, tol)
    rep.data.update({"kappa": cq.kappa, "mu": cq.mu, "a": a_, "b": b_,
                     "invariant": (a_ + b_) / abs(a_ - b_)})
    if original is not None:
        o = original.cast(bk) if original.backend != bk else original
        rep.check("round trip phi", "recovered phi = original phi", bk.max_abs(q.phi - o.phi), tol)
        rep.check("round trip g", "recovered g = original g", bk.max_abs(q.g - o.g), tol)
    return q, rep


def round_trip(p: StructurePack, m: FrameManifold, h: HOperator, cert: NullityCertificate) -> VerificationReport:
    """Canonical metric, then the converse construction with a, b = 2 - mu +- 2 lambda."""
    from .canonical import build_canonical

    target, q = build_canonical(p, m, h, cert)
    bk = q.backend
    plus, minus = (bk.cast(h.plus), bk.cast(h.minus)) if is_exact_array(h.plus) == bk.exact else (
        np.asarray(h.plus, dtype=float), np.asarray(h.minus, dtype=float))
    a, b = _ab(cert, bk)
    mm = m.cast(bk) if m.backend != bk else m
    _, rep = reves1_report(q, mm, plus, minus, a, b, original=p)
    rep.title = f"round trip through the {target} metric"
    return rep


__all__ = [
    "LegendreError",
    "LegendreFoliationData",
    "pang_form",
    "classify",
    "legendre_foliation",
    "libermann_map",
    "libermann_report",
    "totally_geodesic_check",
    "pang_vs_canonical_metric",
    "foliation_suite",
    "reves1_construct",
    "reves1_para_construct",
    "reves1_report",
    "round_trip",
]
