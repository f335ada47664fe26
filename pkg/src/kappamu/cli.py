"""Command line: verify, construct, sweep, synth.

Exit codes: 0 all checks pass, 1 a verification failed or a construction was
refused, 2 usage or configuration error.  Settings resolve as flags, then the
JSON file named by KMU_CONFIG, then defaults.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .backend import DEFAULT_TOLERANCE, format_scalar, parse_scalar
from .canonical import (
    build_parasasakian,
    build_sasakian,
    canonical_report,
    canonical_sequence,
    canonical_sequence_report,
    eta_einstein_constants,
    fit_eta_einstein,
)
from .catalog import ModelDescriptor
from .legendre import reves1_report
from .modelio import ModelFileError, descriptor_from_pack, model_document, save_model
from .nullity import GateError, boeckx_invariant, d_homothetic_deform, deformed_constants, pipeline
from .report import VerificationReport, canonical_json, markdown_from_dict
from .structures import normality_tensor, orthonormalize, validate_structure
from .suites import (
    EngineConfig,
    ModelSource,
    UsageError,
    grid_points,
    parse_grid,
    resolve,
    run_suite,
    run_sweep,
    sweep_exit_code,
)
from .synth import SynthesisError, synthesize_brackets

CONFIG_ENV = "KMU_CONFIG"
CONFIG_KEYS = ("backend", "tolerance", "jobs", "format")
DEFAULTS = {"backend": "exact", "tolerance": DEFAULT_TOLERANCE, "jobs": 1, "format": "json"}


def _rational(text: str):
    try:
        return parse_scalar(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmu", description="Contact metric (kappa, mu)-space verifier")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, grid=False):
        p.add_argument("--model", choices=("t1n", "kmu", "heisenberg"))
        p.add_argument("--file")
        num = str if grid else _rational
        p.add_argument("--c", type=num, help="p/q rational" + (", list a,b,c or range lo:hi:step" if grid else ""))
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--kappa", type=num)
        p.add_argument("--mu", type=num)
        p.add_argument("--tol", type=float, help="float-mode tolerance")
        p.add_argument("--backend", choices=("exact", "float"))
        p.add_argument("--jobs", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "md"))

    p = sub.add_parser("verify", help="run the suite for the model's certificate")
    common(p)
    p = sub.add_parser("construct", help="build a new structure from the model")
    common(p)
    p.add_argument("--target", required=True,
                   help="sasakian | parasasakian | deform:c | sequence:k | reves1:a,b")
    p = sub.add_parser("sweep", help="evaluate a grid of models")
    common(p, grid=True)
    p.add_argument("--target", default="certificate", help="suite: certificate | einstein | verify")
    p = sub.add_parser("synth", help="synthesize a frame model with given (kappa, mu)")
    common(p)
    return parser


def load_config(args) -> tuple[EngineConfig, dict]:
    settings = dict(DEFAULTS)
    path = os.environ.get(CONFIG_ENV)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"{CONFIG_ENV}={path}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError(f"{CONFIG_ENV}={path}: expected a JSON object")
        unknown = sorted(set(doc) - set(CONFIG_KEYS))
        if unknown:
            raise UsageError(f"{CONFIG_ENV}={path}: unknown key {unknown[0]!r}")
        settings.update(doc)
    for key, flag in (("backend", args.backend), ("tolerance", args.tol), ("jobs", args.jobs), ("format", args.format)):
        if flag is not None:
            settings[key] = flag
    if settings["backend"] not in ("exact", "float"):
        raise UsageError(f"backend must be exact or float, got {settings['backend']!r}")
    if settings["format"] not in ("json", "md"):
        raise UsageError(f"format must be json or md, got {settings['format']!r}")
    try:
        tol = float(settings["tolerance"])
    except (TypeError, ValueError):
        raise UsageError(f"tolerance must be a number, got {settings['tolerance']!r}") from None
    if not tol > 0:
        raise UsageError("tolerance must be positive")
    return EngineConfig(settings["backend"], tol), settings


def _source(args) -> ModelSource:
    return ModelSource(args.model, args.file, args.c, args.n, args.kappa, args.mu)


def _emit(doc: dict, fmt: str, out: str | None) -> None:
    text = canonical_json(doc)
    if fmt == "md":
        text = markdown_from_dict(json.loads(text))
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- verbs -------------------------------------------------------------------------

def cmd_verify(args, config: EngineConfig, settings: dict) -> int:
    desc, loaded = resolve(_source(args), config)
    rep = run_suite(desc, config, loaded)
    _emit(rep.to_dict(), settings["format"], args.out)
    return 0 if rep.passed else 1


def _parse_target(text: str) -> tuple[str, list]:
    kind, _, rest = text.partition(":")
    if kind in ("sasakian", "parasasakian"):
        if rest:
            raise UsageError(f"target {kind} takes no argument")
        return kind, []
    if kind == "deform":
        return kind, [parse_scalar(rest)]
    if kind == "sequence":
        if not rest.isdigit() or int(rest) < 1:
            raise UsageError("sequence:k needs a positive integer k")
        return kind, [int(rest)]
    if kind == "reves1":
        parts = rest.split(",")
        if len(parts) != 2:
            raise UsageError("reves1:a,b needs two numbers")
        return kind, [parse_scalar(x) for x in parts]
    raise UsageError(f"unknown target {text!r}")


def _construct_certificate(desc: ModelDescriptor, q, extra: dict | None = None) -> dict:
    m = desc.manifold.cast(q.backend) if desc.manifold.backend != q.backend else desc.manifold
    _, _, _, cert = pipeline(q, m)
    out = {"nullity": cert.to_dict(), "normality_residual": q.backend.max_abs(normality_tensor(q, m)),
           "source": desc.describe()}
    out.update(extra or {})
    return out


def _foliation_pair(q, h):
    bk = q.backend
    plus, minus = h.plus, h.minus
    if bk.exact and (plus.dtype != object):
        bk = bk.as_float()
    plus, minus = bk.cast(plus), bk.cast(minus)
    return orthonormalize(bk, plus, q.g), orthonormalize(bk, minus, q.g)


def cmd_construct(args, config: EngineConfig, settings: dict) -> int:
    kind, params = _parse_target(args.target)
    desc, _ = resolve(_source(args), config)
    m, p = desc.manifold, desc.pack
    conn, curv, h, cert = pipeline(p, m)
    rep = VerificationReport(f"construct {args.target} from {desc.name}", provenance=desc.describe(),
                             config=config.to_dict())
    packs: list[tuple[str, object, dict]] = []
    if kind in ("sasakian", "parasasakian"):
        q = (build_sasakian if kind == "sasakian" else build_parasasakian)(p, m, h, cert)
        rep.extend(canonical_report(p, m, h, cert))
        closed = eta_einstein_constants(cert, p.n, kind, q.backend)
        mm = m.cast(q.backend) if m.backend != q.backend else m
        fitted, res = fit_eta_einstein(q, mm)
        extra = {"eta_einstein": {"closed_form": closed.to_dict(), "fitted": fitted.to_dict(),
                                  "fit_residual": res}}
        packs.append((kind, q, extra))
    elif kind == "deform":
        (c,) = params
        q = d_homothetic_deform(p, c)
        mm = m.cast(q.backend) if m.backend != q.backend else m
        rep.extend(validate_structure(q, mm), prefix="structure: ")
        _, _, _, cq = pipeline(q, mm)
        if cert.is_kmu and cert.mu is not None:
            k2, m2 = deformed_constants(cert.kappa, cert.mu, c)
            rep.check("nullity", "R(X,Y)xi = kappa'(...) + mu'(...)", cq.residual, cq.tolerance)
            rep.check("kappa'", "kappa' = (kappa + c^2 - 1)/c^2", abs(cq.kappa - k2), q.backend.tol)
            if cq.mu is not None:
                rep.check("mu'", "mu' = (mu + 2c - 2)/c", abs(cq.mu - m2), q.backend.tol)
            if cert.invariant is not None and cq.invariant is not None:
                rep.check("Boeckx invariant", "I' = I", abs(cq.invariant - cert.invariant), q.backend.tol)
                rep.data["invariant"] = boeckx_invariant(cq.kappa, cq.mu)
        packs.append((f"deform-{c}", q, {}))
    elif kind == "sequence":
        (k,) = params
        seq = canonical_sequence(p, m, h, cert, k)
        rep.extend(canonical_sequence_report(p, m, h, cert, k))
        for i, q in enumerate(seq[1:], start=1):
            packs.append((f"sequence-{i}", q, {"index": i}))
    else:
        a, b = params
        target = cert.regime
        if target == "sasakian":
            kpack = build_sasakian(p, m, h, cert)
        elif target == "parasasakian":
            kpack = build_parasasakian(p, m, h, cert)
        else:
            raise GateError(f"reves1 needs a non-Sasakian (kappa,mu) source with |I| != 1 (regime {target})")
        F1, F2 = _foliation_pair(kpack, h)
        mm = m.cast(kpack.backend) if m.backend != kpack.backend else m
        q, r = reves1_report(kpack, mm, F1, F2, a, b)
        rep.extend(r)
        packs.append((f"reves1-{a}-{b}", q, {"a": a, "b": b}))
    documents = []
    for label, q, extra in packs:
        mm = m.cast(q.backend) if m.backend != q.backend else m
        cdesc = descriptor_from_pack(f"{desc.name}:{label}", mm, q, {"source": desc.name, "target": args.target},
                                     certificate=_construct_certificate(desc, q, extra))
        documents.append(cdesc)
    rep.data["models"] = [model_document(d) for d in documents]
    if args.out:
        _write_models(documents, args.out)
        rep.data["files"] = _model_paths(args.out, len(documents))
    _emit(rep.to_dict(), settings["format"], None)
    return 0 if rep.passed else 1


def _model_paths(out: str, count: int) -> list[str]:
    if count == 1:
        return [out]
    path = Path(out)
    return [str(path.with_name(f"{path.stem}_{i}{path.suffix}")) for i in range(1, count + 1)]


def _write_models(documents, out: str) -> None:
    for d, path in zip(documents, _model_paths(out, len(documents))):
        save_model(d, path)


def cmd_sweep(args, config: EngineConfig, settings: dict) -> int:
    if args.model is not None or args.file is not None:
        raise UsageError("sweep takes a grid (--c or --kappa/--mu), not a model source")
    points = grid_points(parse_grid(args.c), parse_grid(args.kappa), parse_grid(args.mu), args.n)
    doc = run_sweep(points, args.target, config, int(settings["jobs"]))
    _emit(doc, settings["format"], args.out)
    return sweep_exit_code(doc)


def cmd_synth(args, config: EngineConfig, settings: dict) -> int:
    if args.kappa is None or args.mu is None:
        raise UsageError("synth needs --kappa and --mu")
    if not args.kappa < 1:
        raise UsageError(f"synth needs kappa < 1, got {args.kappa}")
    desc = synthesize_brackets(args.n, args.kappa, args.mu, backend=config.scalar_backend())
    doc = {"title": f"synthesized {desc.name}", "config": config.to_dict(),
           "certificate": {k: format_scalar(v) if not isinstance(v, str) else v for k, v in desc.certificate.items()},
           "parameters": desc.parameters, "status": "pass"}
    if args.out:
        save_model(desc, args.out)
        doc["file"] = args.out
    else:
        doc["model"] = model_document(desc)
    _emit(doc, settings["format"], None)
    return 0


VERBS = {"verify": cmd_verify, "construct": cmd_construct, "sweep": cmd_sweep, "synth": cmd_synth}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config, settings = load_config(args)
        return VERBS[args.verb](args, config, settings)
    except GateError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ModelFileError, FileNotFoundError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SynthesisError as exc:
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
