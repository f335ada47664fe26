"""Constraint solver producing frame models with prescribed nullity constants.

Unknowns are the free structure constants of the catalog family (see
:mod:`kappamu.catalog`).  Residuals collect the Jacobi identity, the target
h-operator, the nullity condition and the Koszul-derived identities for
nabla xi, nabla phi, nabla h and nabla phi h.  The solve is a deterministic
Levenberg-Marquardt run from a fixed starting point; the solution is then
rationalized and re-certified in exact arithmetic when the inputs allow it.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.optimize import least_squares

from .backend import ScalarBackend, rational_sqrt
from .catalog import ModelDescriptor, family_model
from .frame import covariant_derivative_vector, curvature, koszul_connection
from .nullity import identity_defects, nullity_terms, pipeline, verify_kmu_identities

DENOMINATOR_BOUND = 10**6


class SynthesisError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


def n_params(n: int) -> int:
    return 2 if n == 1 else 4


def residual_vector(x: np.ndarray, n: int, kappa: float, mu: float, lam: float) -> np.ndarray:
    fb = ScalarBackend("float")
    m, p = family_model(n, list(x), fb)
    target_h = np.diag([0.0] + [lam] * n + [-lam] * n)
    h = 0.5 * (np.einsum("i,ijk->kj", p.xi, m.tangent_brackets) @ p.phi
               - p.phi @ np.einsum("i,ijk->kj", p.xi, m.tangent_brackets))
    C = m.brackets
    t = np.einsum("ijm,mkl->ijkl", C, C)
    jac = t + np.einsum("jkil->ijkl", t) + np.einsum("kijl->ijkl", t)
    conn = koszul_connection(m, p.g)
    curv = curvature(m, conn, p.g)
    T = np.einsum("k,ijkl->ijl", p.xi, curv.R)
    A, B = nullity_terms(p, target_h)
    parts = [
        jac.ravel(),
        (h - target_h).ravel(),
        (T - kappa * A - mu * B).ravel(),
        (covariant_derivative_vector(conn, p.xi) + p.phi + p.phi @ target_h).ravel(),
    ]
    defects = identity_defects(p, m, kappa, mu, conn, target_h)
    parts += [defects[k].ravel() for k in ("nabla phi", "nabla h", "nabla phi h")]
    return np.concatenate(parts)


def initial_guess(n: int, lam: float) -> np.ndarray:
    """Start from brackets that already realize the target h but nothing else."""
    x0 = np.zeros(n_params(n))
    x0[0] = x0[1] = lam
    return x0


def _solve(x0, n, kappa, mu, lam, budget):
    return least_squares(
        residual_vector,
        x0,
        args=(n, kappa, mu, lam),
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=budget,
    )


def _continuation_starts(lam: float):
    """Fixed, ordered starting values for (w1, w2) after the 3-dim stage."""
    return ([0.0, 0.0], [-lam, lam], [-1.0, -1.0], [-2 * lam, 2 * lam])


def synthesize_brackets(n: int, kappa, mu, backend: ScalarBackend | None = None,
                        budget: int = 200) -> ModelDescriptor:
    """Solve for a (2n+1)-dim frame model with nullity constants (kappa, mu).

    The 3-dim subproblem is solved first; for n >= 2 its solution seeds the
    shared constants and a fixed list of starts is tried for the isotropy
    constants, so the result is deterministic.
    """
    backend = backend or ScalarBackend()
    if n < 1:
        raise ValueError("n must be at least 1")
    if not kappa < 1:
        raise ValueError(f"synthesis needs kappa < 1, got {kappa}")
    lam = float(1 - kappa) ** 0.5
    k, m_ = float(kappa), float(mu)
    sol = _solve(initial_guess(1, lam), 1, k, m_, lam, budget)
    if n >= 2:
        base = sol.x
        best_sol = None
        for w0 in _continuation_starts(lam):
            trial = _solve(np.r_[base, w0], n, k, m_, lam, budget)
            if best_sol is None or np.abs(trial.fun).max() < np.abs(best_sol.fun).max():
                best_sol = trial
            if np.abs(trial.fun).max() <= backend.tolerance * 1e-3:
                break
        sol = best_sol
    best = float(np.abs(sol.fun).max())
    if best > backend.tolerance:
        raise SynthesisError(f"no model found for n={n}, kappa={kappa}, mu={mu}", best)

    exact_inputs = isinstance(kappa, Fraction) and isinstance(mu, Fraction)
    if backend.exact and exact_inputs and rational_sqrt(1 - kappa) is not None:
        params = [Fraction(float(v)).limit_denominator(DENOMINATOR_BOUND) for v in sol.x]
        desc = _certified(n, kappa, mu, params, backend, best)
        if desc is not None:
            return desc
    fb = backend.as_float()
    desc = _certified(n, float(kappa), float(mu), [float(v) for v in sol.x], fb, best)
    if desc is None:
        raise SynthesisError("solution failed certification", best)
    return desc


def _certified(n, kappa, mu, params, backend, solver_residual):
    m, p = family_model(n, params, backend)
    if not backend.ok(m.jacobi_residual()):
        return None
    conn, curv, hop, cert = pipeline(p, m)
    if not cert.is_kmu or cert.mu is None:
        return None
    tol = backend.tol
    if abs(cert.kappa - kappa) > tol or abs(cert.mu - mu) > tol:
        return None
    if not verify_kmu_identities(p, m, cert, conn, hop).passed:
        return None
    certificate = {
        "kappa": cert.kappa,
        "mu": cert.mu,
        "nullity_residual": cert.residual,
        "jacobi_residual": m.jacobi_residual(),
        "solver_residual": solver_residual,
        "scalars": "rational" if backend.exact else "float",
    }
    return ModelDescriptor(
        f"kmu-n{n}-k{kappa}-m{mu}",
        {"n": n, "kappa": kappa, "mu": mu, "params": list(params)},
        "synthesized",
        m,
        p,
        claims={"kappa": kappa, "mu": mu},
        certificate=certificate,
    )
