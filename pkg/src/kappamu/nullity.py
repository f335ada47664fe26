"""The (kappa, mu)-nullity condition: fitting, invariants, deformations, identities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .backend import ScalarBackend, convert, rational_sqrt
from .frame import (
    ConnectionCoefficients,
    CurvatureTensor,
    FrameManifold,
    covariant_derivative_endo,
    covariant_derivative_vector,
    curvature,
    koszul_connection,
    lie_derivative_endo,
)
from .report import VerificationReport
from .structures import HOperator, StructurePack, _compatible, compute_h, normality_tensor, validate_structure


class GateError(ValueError):
    """A construction was refused because the model is outside its hypotheses."""


@dataclass(frozen=True)
class NullityCertificate:
    """Fitted nullity constants and the invariants derived from them.

    ``lam``, ``invariant`` and ``epsilon`` are ``None`` when undefined
    (kappa >= 1, or |I| <= 1 for epsilon).  ``mu`` is ``None`` when h = 0.
    """

    kappa: object
    mu: object
    residual: object
    tolerance: object
    kind: str
    lam: object = None
    invariant: object = None
    alpha: object = None
    epsilon: int | None = None

    @property
    def is_kmu(self) -> bool:
        return self.residual <= self.tolerance

    @property
    def exact(self) -> bool:
        return isinstance(self.kappa, Fraction) and (self.mu is None or isinstance(self.mu, Fraction))

    @property
    def regime(self) -> str:
        """Which canonical-metric track applies to this certificate."""
        if not self.is_kmu:
            return "not-kmu"
        if self.mu is None or self.lam is None or self.lam == 0:
            return "sasakian-input"
        if _is_zero(self.alpha, self.tolerance):
            return "boundary"
        return "sasakian" if self.alpha > 0 else "parasasakian"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kappa": self.kappa,
            "mu": self.mu,
            "lambda": self.lam,
            "invariant": self.invariant,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "residual": self.residual,
            "is_kmu": self.is_kmu,
            "regime": self.regime,
        }


def _is_zero(x, tol) -> bool:
    return abs(x) <= tol


def certificate_from_constants(kappa, mu, backend: ScalarBackend, kind: str = "contact",
                               residual=None) -> NullityCertificate:
    """Derived invariants for known (kappa, mu); exact where the roots allow."""
    residual = backend.tol * 0 if residual is None else residual
    kappa = convert(kappa, backend) if not isinstance(kappa, float) else kappa
    lam = inv = alpha = eps = None
    if mu is not None:
        alpha = (2 - mu) ** 2 - 4 * (1 - kappa)
    if kappa < 1 and not _is_zero(1 - kappa, backend.tol):
        lam = _sqrt(1 - kappa)
        if mu is not None:
            inv = (1 - mu / 2) / lam
            if alpha > backend.tol:
                eps = 1 if (2 - mu) > 0 else -1
    elif _is_zero(1 - kappa, backend.tol):
        lam = kappa * 0
    return NullityCertificate(kappa, mu, residual, backend.tol, kind, lam, inv, alpha, eps)


def _sqrt(x):
    if isinstance(x, Fraction):
        r = rational_sqrt(x)
        if r is not None:
            return r
    return math.sqrt(float(x))


def nullity_terms(p: StructurePack, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Frame tables of eta(Y)X - eta(X)Y and eta(Y)hX - eta(X)hY, indexed [i, j, :]."""
    bk = p.backend
    eye = bk.eye(p.dim)
    A = np.einsum("j,ik->ijk", p.eta, eye) - np.einsum("i,jk->ijk", p.eta, eye)
    B = np.einsum("j,ik->ijk", p.eta, h.T) - np.einsum("i,jk->ijk", p.eta, h.T)
    return A, B


def fit_nullity(p: StructurePack, curv: CurvatureTensor, h: HOperator | np.ndarray) -> NullityCertificate:
    """Least-squares (kappa, mu) in R(X,Y)xi = kappa(...) + mu(h...) over all frame pairs."""
    bk = curv.backend
    p = p.cast(bk) if p.backend != bk else p
    hm = h.h if isinstance(h, HOperator) else h
    hm = bk.cast(hm)
    T = np.einsum("k,ijkl->ijl", p.xi, curv.R)
    A, B = nullity_terms(p, hm)
    a, b, t = A.ravel(), B.ravel(), T.ravel()
    aa, ab, bb = a @ a, a @ b, b @ b
    at, bt = a @ t, b @ t
    det = aa * bb - ab * ab
    if bk.max_abs(hm) <= bk.tol or abs(det) <= bk.tol * max(1, aa * bb):
        kappa = at / aa
        mu = None
        resid = bk.max_abs(t - kappa * a)
    else:
        kappa = (at * bb - bt * ab) / det
        mu = (aa * bt - ab * at) / det
        resid = bk.max_abs(t - kappa * a - mu * b)
    return certificate_from_constants(kappa, mu, bk, p.kind, resid)


def boeckx_invariant(kappa, mu, backend: ScalarBackend | None = None):
    """(1 - mu/2) / sqrt(1 - kappa); exact when the root is rational."""
    if kappa >= 1:
        raise ValueError(f"the invariant needs kappa < 1, got {kappa}")
    return (1 - mu / 2) / _sqrt(1 - kappa)


def deformed_constants(kappa, mu, c):
    """Nullity constants after a D-homothetic deformation with constant c."""
    return (kappa + c * c - 1) / (c * c), (mu + 2 * c - 2) / c


def d_homothetic_deform(p: StructurePack, c) -> StructurePack:
    """phi' = phi, xi' = xi / c, eta' = c eta, g' = c g + c(c-1) eta (x) eta."""
    if p.kind == "contact" and not c > 0:
        raise ValueError(f"contact deformations need c > 0, got {c}")
    if p.kind == "paracontact" and c == 0:
        raise ValueError("paracontact deformations need c != 0")
    bk = p.backend
    if bk.exact and isinstance(c, float):
        bk = bk.as_float()
        p = p.cast(bk)
    c = convert(c, bk)
    ee = np.outer(p.eta, p.eta)
    return StructurePack(p.kind, p.phi, p.xi / c, p.eta * c, p.g * c + ee * (c * (c - 1)), bk)


def pipeline(p: StructurePack, m: FrameManifold):
    """Connection, curvature, h and certificate of a pack in one go."""
    m, p = _compatible(m, p)
    conn = koszul_connection(m, p.g)
    curv = curvature(m, conn, p.g)
    hop = compute_h(p, m)
    cert = fit_nullity(p, curv, hop)
    return conn, curv, hop, cert


def _require_kmu(cert: NullityCertificate):
    if not cert.is_kmu:
        raise GateError(f"not a (kappa,mu)-space: nullity residual {cert.residual}")
    if not cert.kappa < 1 or cert.mu is None:
        raise GateError(f"identities need a non-Sasakian (kappa,mu)-space, got kappa={cert.kappa}")


IDENTITY_ANCHORS = {
    "h squared": "h^2 = -(1-kappa) phi^2",
    "nabla phi": "(nabla_X phi)Y = g(X+hX,Y) xi - eta(Y)(X+hX)",
    "nabla h": "(nabla_X h)Y = ((1-kappa)g(X,phi Y) - g(X,phi h Y))xi + eta(Y)h(phi X + phi h X) - mu eta(X) phi h Y",
    "nabla phi h": "(nabla_X phi h)Y = (g(X,hY) - (1-kappa)g(X,phi^2 Y))xi + eta(Y)(hX - (1-kappa)phi^2 X) + mu eta(X) hY",
    "Lie derivative of h": "L_xi h = (2-mu) phi h + 2(1-kappa) phi",
}


def identity_defects(p: StructurePack, m: FrameManifold, kappa, mu,
                     conn: ConnectionCoefficients, hm: np.ndarray) -> dict[str, np.ndarray]:
    """Left minus right side of each (kappa,mu) identity, as frame tables.

    Covariant-derivative tables are indexed ``[i, k, j]``: component k of
    (nabla_{e_i} A) e_j.
    """
    bk = p.backend
    g, phi, xi, eta = p.g, p.phi, p.xi, p.eta
    eye = bk.eye(p.dim)
    one_k = 1 - kappa
    ph = phi @ hm
    phi2 = phi @ phi
    out = {"h squared": hm @ hm + one_k * phi2}

    M = eye + hm
    want = np.einsum("ij,k->ikj", M.T @ g, xi) - np.einsum("j,ki->ikj", eta, M)
    out["nabla phi"] = covariant_derivative_endo(conn, phi) - want

    coef = one_k * (g @ phi) - g @ ph
    want = (np.einsum("ij,k->ikj", coef, xi)
            + np.einsum("j,ki->ikj", eta, hm @ phi + hm @ ph)
            - mu * np.einsum("i,kj->ikj", eta, ph))
    out["nabla h"] = covariant_derivative_endo(conn, hm) - want

    coef = g @ hm - one_k * (g @ phi2)
    want = (np.einsum("ij,k->ikj", coef, xi)
            + np.einsum("j,ki->ikj", eta, hm - one_k * phi2)
            + mu * np.einsum("i,kj->ikj", eta, hm))
    out["nabla phi h"] = covariant_derivative_endo(conn, ph) - want

    out["Lie derivative of h"] = lie_derivative_endo(m, xi, hm) - (2 - mu) * ph - 2 * one_k * phi
    return out


def verify_kmu_identities(p: StructurePack, m: FrameManifold, cert: NullityCertificate,
                          conn: ConnectionCoefficients | None = None,
                          h: HOperator | None = None) -> VerificationReport:
    """The standard identities of non-Sasakian (kappa,mu)-spaces, checked on the frame."""
    _require_kmu(cert)
    m, p = _compatible(m, p)
    bk = p.backend
    conn = conn or koszul_connection(m, p.g)
    hm = bk.cast((h or compute_h(p, m)).h)
    kappa, mu = convert_scalar(cert.kappa, bk), convert_scalar(cert.mu, bk)
    rep = VerificationReport("(kappa,mu) identities")
    for name, defect in identity_defects(p, m, kappa, mu, conn, hm).items():
        rep.check(name, IDENTITY_ANCHORS[name], bk.max_abs(defect), bk.tol)
    return rep


def reeb_derivative_check(p: StructurePack, conn: ConnectionCoefficients, h: np.ndarray) -> VerificationReport:
    """nabla xi = -phi - phi h (contact) or -phi + phi h (paracontact)."""
    bk = conn.backend
    p = p.cast(bk) if p.backend != bk else p
    h = bk.cast(h)
    Dxi = covariant_derivative_vector(conn, p.xi)
    rep = VerificationReport("Reeb field derivative")
    if p.kind == "contact":
        rep.check("nabla xi", "nabla xi = -phi - phi h", bk.max_abs(Dxi + p.phi + p.phi @ h), bk.tol)
    else:
        rep.check("nabla xi", "nabla xi = -phi + phi h", bk.max_abs(Dxi + p.phi - p.phi @ h), bk.tol)
    return rep


def convert_scalar(x, backend: ScalarBackend):
    if x is None:
        return None
    if backend.exact:
        return convert(x, backend)
    return float(x)


def associated_paracontact_pair(p: StructurePack, m: FrameManifold, h: HOperator,
                                cert: NullityCertificate) -> tuple[StructurePack, StructurePack]:
    """The two paracontact metric structures canonically attached to a (kappa,mu)-space.

    Pack 1 uses phi_1 = phi h / lambda with metric g_1 = -(1/lambda) g(., h .) + eta (x) eta;
    the sign of the metric term is the one for which d eta = g_1(., phi_1 .).
    Pack 2 uses phi_2 = h / lambda and g_2 = (1/lambda) g(., phi h .) + eta (x) eta.
    """
    _require_kmu(cert)
    m, p = _compatible(m, p)
    bk = p.backend
    lam = cert.lam
    if bk.exact and not isinstance(lam, Fraction):
        bk = bk.as_float()
        p = p.cast(bk)
    lam = convert_scalar(lam, bk)
    hm = bk.cast(h.h)
    ee = np.outer(p.eta, p.eta)
    ph = p.phi @ hm
    pack1 = StructurePack("paracontact", ph / lam, p.xi, p.eta, ee - (p.g @ hm) / lam, bk)
    pack2 = StructurePack("paracontact", hm / lam, p.xi, p.eta, ee + (p.g @ ph) / lam, bk)
    return pack1, pack2


def nullity_residual(p: StructurePack, curv: CurvatureTensor, hm: np.ndarray, kappa, mu):
    """Largest deviation of R(X,Y)xi from the nullity form with the given constants."""
    bk = curv.backend
    p = p.cast(bk) if p.backend != bk else p
    T = np.einsum("k,ijkl->ijl", p.xi, curv.R)
    A, B = nullity_terms(p, bk.cast(hm))
    return bk.max_abs(T - kappa * A - mu * B)


def paracontact_pair_report(p: StructurePack, m: FrameManifold, h: HOperator,
                            cert: NullityCertificate) -> VerificationReport:
    """Validate both associated paracontact structures and test the stated constants.

    Constants are tested by substituting them into the nullity-like condition,
    which stays meaningful when h_1 = 0 and mu_1 cannot be fitted.
    """

    pack1, pack2 = associated_paracontact_pair(p, m, h, cert)
    bk = pack1.backend
    mm = m.cast(bk) if m.backend != bk else m
    kappa, mu = convert_scalar(cert.kappa, bk), convert_scalar(cert.mu, bk)
    lam = convert_scalar(cert.lam, bk)
    inv = convert_scalar(cert.invariant, bk)
    tol = bk.tol
    rep = VerificationReport("associated paracontact structures")
    rep.extend(validate_structure(pack1, mm), prefix="pair 1: ")
    rep.extend(validate_structure(pack2, mm), prefix="pair 2: ")
    _, curv1, h1, cert1 = pipeline(pack1, mm)
    _, curv2, h2, cert2 = pipeline(pack2, mm)
    rep.check("pair 1: nullity-like condition", "R_1(X,Y)xi = k_1(...) + m_1(...)", cert1.residual, tol)
    rep.check("pair 2: nullity-like condition", "R_2(X,Y)xi = k_2(...) + m_2(...)", cert2.residual, tol)
    rep.check("pair 1: h_1 = -I h", "h_1 = -I h", bk.max_abs(h1.h + inv * bk.cast(h.h)), tol)

    mu1 = 2 * (1 - lam)
    rep.check("pair 1: mu_1", "mu_1 = 2(1 - sqrt(1-kappa))",
              nullity_residual(pack1, curv1, h1.h, cert1.kappa, mu1), tol)
    readings = {"(1-mu/2)-1": (1 - mu / 2) - 1, "(1-mu/2)^2-1": (1 - mu / 2) ** 2 - 1}
    agree = {}
    for label, value in readings.items():
        agree[label] = nullity_residual(pack1, curv1, h1.h, value, mu1) <= tol
    rep.data["kappa_1"] = {"fitted": cert1.kappa, "readings": readings, "agrees": agree}
    rep.boolean("pair 1: kappa_1 matches a stated reading", "kappa_1 = (1-mu/2)^2 - 1 or (1-mu/2) - 1",
                any(agree.values()),
                "fitted {}; agrees with {}".format(cert1.kappa, ", ".join(k for k, v in agree.items() if v) or "neither"))
    rep.check("pair 2: kappa_2 and mu_2", "kappa_2 = kappa - 2 + (1-mu/2)^2, mu_2 = 2",
              nullity_residual(pack2, curv2, h2.h, kappa - 2 + (1 - mu / 2) ** 2, 2), tol)
    N2 = bk.max_abs(normality_tensor(pack2, mm))
    rep.boolean("pair 2: never paraSasakian", "N_2 != 0", N2 > tol, f"max |N_2| = {N2}")
    return rep


__all__ = [
    "GateError",
    "NullityCertificate",
    "fit_nullity",
    "boeckx_invariant",
    "d_homothetic_deform",
    "deformed_constants",
    "verify_kmu_identities",
    "reeb_derivative_check",
    "associated_paracontact_pair",
    "paracontact_pair_report",
    "nullity_residual",
    "identity_defects",
    "certificate_from_constants",
    "pipeline",
]
