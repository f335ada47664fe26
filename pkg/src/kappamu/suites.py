"""Verification suites, model sources and parameter sweeps used by the command line.

A suite picks its track from the certificate: |I| > 1 runs the Sasakian
track (with rescaling, and Einstein-Weyl in dimension >= 5), |I| < 1 the
paraSasakian track (with the canonical sequence), anything else the
axioms-only track.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

from .backend import DEFAULT_TOLERANCE, ScalarBackend, format_scalar, parse_scalar
from .canonical import (
    build_canonical,
    canonical_report,
    canonical_sequence_report,
    deformation_equivariance_report,
    dual_route_report,
    einstein_rescale,
    einstein_weyl_check,
    fit_eta_einstein,
    ricci_consistency_report,
    sectional_profile,
    transverse_ricci_report,
)
from .catalog import ModelDescriptor, model_heisenberg, model_kappa_mu, model_t1n, t1n_constants, t1n_invariant
from .legendre import foliation_suite, round_trip
from .modelio import load_model, verification_report
from .nullity import (
    GateError,
    boeckx_invariant,
    deformed_constants,
    paracontact_pair_report,
    pipeline,
    reeb_derivative_check,
    verify_kmu_identities,
)
from .report import VerificationReport

MODELS = ("t1n", "kmu", "heisenberg")
SWEEP_SUITES = ("certificate", "einstein", "verify")
EQUIVARIANCE_C = Fraction(2)
SAMPLE_SEED = 7


class UsageError(ValueError):
    """Bad flags or model source; exit code 2."""


@dataclass(frozen=True)
class EngineConfig:
    backend: str = "exact"
    tolerance: float = DEFAULT_TOLERANCE
    weyl_tolerance: float = 1e-8

    def scalar_backend(self) -> ScalarBackend:
        return ScalarBackend(self.backend, self.tolerance)

    def to_dict(self) -> dict:
        return dict(asdict(self), seed=SAMPLE_SEED)


@dataclass(frozen=True)
class ModelSource:
    """Catalog name plus parameters, or a model file."""

    model: str | None = None
    file: str | None = None
    c: object = None
    n: int = 1
    kappa: object = None
    mu: object = None


def resolve(source: ModelSource, config: EngineConfig) -> tuple[ModelDescriptor, VerificationReport | None]:
    """Descriptor for a source; file sources come with their load-time verification."""
    bk = config.scalar_backend()
    if source.file is not None:
        if source.model is not None:
            raise UsageError("give either --model or --file, not both")
        desc, rep = load_model(source.file, bk)
        if not bk.exact:
            desc = _as_float(desc, bk)
        return desc, rep
    if source.model is None:
        raise UsageError("a model source is required (--model or --file)")
    if source.model == "t1n":
        if source.c is None:
            raise UsageError("--model t1n needs --c")
        if source.c == 1:
            raise UsageError("t1n needs c != 1")
        return model_t1n(source.c, source.n, bk), None
    if source.model == "kmu":
        if source.kappa is None or source.mu is None:
            raise UsageError("--model kmu needs --kappa and --mu")
        if not source.kappa < 1:
            raise UsageError(f"--model kmu needs kappa < 1, got {source.kappa}")
        return model_kappa_mu(source.n, source.kappa, source.mu, bk), None
    if source.model == "heisenberg":
        return model_heisenberg(source.n, bk), None
    raise UsageError(f"unknown model {source.model!r}; expected one of {MODELS}")


def _as_float(desc: ModelDescriptor, bk: ScalarBackend) -> ModelDescriptor:
    return ModelDescriptor(desc.name, desc.parameters, desc.provenance, desc.manifold.cast(bk),
                           desc.pack.cast(bk), desc.claims, desc.certificate)


def track_for(cert) -> str:
    regime = cert.regime
    if regime in ("sasakian", "parasasakian"):
        return regime
    return "axioms"


def _guarded(rep: VerificationReport, name: str, fn):
    """Run a sub-suite; a refusal becomes a failed check instead of an exception."""
    try:
        return fn()
    except GateError as exc:
        rep.boolean(name, "hypotheses of the construction hold", False, str(exc))
        return None


def run_suite(desc: ModelDescriptor, config: EngineConfig, loaded: VerificationReport | None = None) -> VerificationReport:
    m, p = desc.manifold, desc.pack
    rep = loaded if loaded is not None else verification_report(desc)
    rep.title = f"verify {desc.name}"
    rep.provenance = desc.describe()
    rep.config = config.to_dict()
    conn, curv, h, cert = pipeline(p, m)
    track = track_for(cert) if p.kind == "contact" else "axioms"
    rep.data.update({"track": track, "certificate": cert.to_dict()})
    if track == "axioms":
        if cert.is_kmu and cert.mu is not None and cert.kappa < 1:
            rep.extend(verify_kmu_identities(p, m, cert, conn, h), prefix="identities: ")
        return rep
    rep.extend(reeb_derivative_check(p, conn, h.h), prefix="reeb: ")
    rep.extend(verify_kmu_identities(p, m, cert, conn, h), prefix="identities: ")
    rep.extend(paracontact_pair_report(p, m, h, cert), prefix="pair: ")
    rep.extend(canonical_report(p, m, h, cert), prefix="canonical: ")
    rep.extend(dual_route_report(p, m, h, cert), prefix="closed forms: ")
    ricci = ricci_consistency_report(p, m, h, cert)
    rep.extend(ricci, prefix="ricci: ")
    rep.data["ricci"] = ricci.data
    rep.extend(transverse_ricci_report(p, m, h, cert), prefix="ricci: ")
    _, sect = sectional_profile(p, m, h, cert, track)
    rep.extend(sect, prefix="sectional: ")
    rep.extend(foliation_suite(p, m, h, cert), prefix="foliations: ")
    rep.extend(round_trip(p, m, h, cert), prefix="converse: ")
    rep.extend(deformation_equivariance_report(p, m, EQUIVARIANCE_C), prefix="deformation: ")
    target, q = build_canonical(p, m, h, cert)
    consts, _ = fit_eta_einstein(q, m.cast(q.backend) if m.backend != q.backend else m)

    def rescale():
        c, _, r = einstein_rescale(q, m, consts, target)
        rep.extend(r, prefix="rescale: ")
        rep.data["rescale"] = r.data

    _guarded(rep, "rescale: hypotheses", rescale)
    if track == "sasakian" and p.dim >= 5:
        weyl = einstein_weyl_check(q, m, config.weyl_tolerance)
        rep.extend(weyl, prefix="weyl: ")
        rep.data["weyl"] = weyl.data
    if track == "parasasakian":
        rep.extend(canonical_sequence_report(p, m, h, cert, 5), prefix="sequence: ")
    return rep


# -- sweeps ----------------------------------------------------------------------

def parse_grid(text: str | None) -> list:
    """``"a,b,c"`` or ``"lo:hi:step"`` (inclusive, rational) into a list of scalars."""
    if text is None:
        return []
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be lo:hi:step, got {text!r}")
        lo, hi, step = (parse_scalar(x) for x in parts)
        if not step > 0:
            raise UsageError("range step must be positive")
        out, k = [], 0
        while lo + k * step <= hi:
            out.append(lo + k * step)
            k += 1
        return out
    try:
        return [parse_scalar(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def grid_points(c_values, kappa_values, mu_values, n: int) -> list[dict]:
    if c_values and (kappa_values or mu_values):
        raise UsageError("sweep over either c or (kappa, mu), not both")
    if c_values:
        return [{"c": c, "n": n} for c in c_values]
    if bool(kappa_values) != bool(mu_values):
        raise UsageError("a (kappa, mu) sweep needs both --kappa and --mu")
    return [{"kappa": k, "mu": m, "n": n} for k in kappa_values for m in mu_values]


def _point_source(point: dict) -> ModelSource:
    if "c" in point:
        return ModelSource(model="t1n", c=point["c"], n=point["n"])
    return ModelSource(model="kmu", kappa=point["kappa"], mu=point["mu"], n=point["n"])


def _certificate_point(desc: ModelDescriptor, point: dict) -> dict:
    _, _, _, cert = pipeline(desc.pack, desc.manifold)
    bk = desc.backend
    out = {"certificate": cert.to_dict()}
    checks = [("nullity fit", cert.is_kmu)]
    if "c" in point:
        kappa, mu = t1n_constants(point["c"])
        checks.append(("closed-form kappa", _close(cert.kappa, kappa, bk)))
        checks.append(("closed-form mu", cert.mu is not None and _close(cert.mu, mu, bk)))
        if point["c"] != 1:
            checks.append(("closed-form invariant", cert.invariant is not None
                           and _close(cert.invariant, t1n_invariant(point["c"]), bk)))
    else:
        checks.append(("claimed kappa", _close(cert.kappa, point["kappa"], bk)))
        checks.append(("claimed mu", cert.mu is not None and _close(cert.mu, point["mu"], bk)))
    if cert.invariant is not None:
        k2, m2 = deformed_constants(cert.kappa, cert.mu, EQUIVARIANCE_C)
        inv2 = boeckx_invariant(k2, m2)
        out["deformed_invariant"] = inv2
        checks.append(("Boeckx invariant preserved under deformation", _close(inv2, cert.invariant, bk)))
    out["checks"] = {name: ok for name, ok in checks}
    out["passed"] = all(ok for _, ok in checks)
    return out


def _einstein_point(desc: ModelDescriptor, point: dict) -> dict:
    m, p = desc.manifold, desc.pack
    _, _, h, cert = pipeline(p, m)
    try:
        target, q = build_canonical(p, m, h, cert)
    except GateError as exc:
        return {"passed": False, "refused": str(exc), "certificate": cert.to_dict()}
    consts, res = fit_eta_einstein(q, m.cast(q.backend) if m.backend != q.backend else m)
    tol = q.backend.tol * max(1, q.backend.max_abs(q.g))
    return {"target": target, "a": consts.a, "b": consts.b, "fit_residual": res,
            "einstein": bool(q.backend.is_zero(consts.b)) and res <= tol,
            "passed": res <= tol, "certificate": cert.to_dict()}


def _verify_point(desc: ModelDescriptor, config: EngineConfig) -> dict:
    rep = run_suite(desc, config)
    return {"passed": rep.passed, "track": rep.data["track"], "summary": rep.summary,
            "failures": [c.name for c in rep.failures]}


def _close(x, y, bk: ScalarBackend) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x == y
    return abs(float(x) - float(y)) <= bk.tolerance


def evaluate_point(args: tuple[int, dict, str, EngineConfig]) -> dict:
    """One sweep point; top-level so worker processes can run it."""
    index, point, suite, config = args
    out = {"index": index, "parameters": dict(point)}
    try:
        desc, _ = resolve(_point_source(point), config)
    except (UsageError, ValueError, RuntimeError) as exc:
        out.update({"passed": False, "status": "fail", "error": str(exc)})
        return out
    if suite == "certificate":
        out.update(_certificate_point(desc, point))
    elif suite == "einstein":
        out.update(_einstein_point(desc, point))
    else:
        out.update(_verify_point(desc, config))
    out["status"] = "pass" if out["passed"] else "fail"
    return out


def run_sweep(points: list[dict], suite: str, config: EngineConfig, jobs: int = 1) -> dict:
    if not points:
        raise UsageError("empty grid")
    if suite not in SWEEP_SUITES:
        raise UsageError(f"sweep suite must be one of {SWEEP_SUITES}, got {suite!r}")
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    tasks = [(i, pt, suite, config) for i, pt in enumerate(points)]
    if jobs == 1:
        results = [evaluate_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate_point, tasks))
    results.sort(key=lambda r: r["index"])
    agg = {}
    n_pass = sum(1 for r in results if r["passed"])
    if suite == "einstein":
        agg["einstein_points"] = [r["parameters"] for r in results if r.get("einstein")]
        agg["sign_changes"] = _sign_changes(results)
    if suite == "certificate":
        agg["boeckx_invariance"] = all(
            r.get("checks", {}).get("Boeckx invariant preserved under deformation", True) for r in results)
    summary = {"total": len(results), "passed": n_pass, "failed": len(results) - n_pass}
    return {"title": f"sweep ({suite})", "suite": suite, "config": config.to_dict(), "aggregates": agg,
            "points": results, "summary": summary, "status": "pass" if n_pass == len(results) else "fail"}


def _sign_changes(results: list[dict]) -> list[dict]:
    """Consecutive grid points where the fitted b changes sign (or vanishes)."""
    out = []
    pts = [r for r in results if "b" in r]
    for left, right in zip(pts, pts[1:]):
        bl, br = left["b"], right["b"]
        if (bl < 0 < br) or (br < 0 < bl):
            out.append({"between": [left["parameters"], right["parameters"]]})
    return out


def sweep_exit_code(doc: dict) -> int:
    return 0 if doc["status"] == "pass" else 1


__all__ = [
    "UsageError",
    "EngineConfig",
    "ModelSource",
    "resolve",
    "track_for",
    "run_suite",
    "parse_grid",
    "grid_points",
    "evaluate_point",
    "run_sweep",
    "sweep_exit_code",
]
