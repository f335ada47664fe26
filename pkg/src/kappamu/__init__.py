"""Frame-model engine for contact metric (kappa, mu)-spaces.

Models are Lie algebras with constant structure constants on a frame;
every tensor is a constant array, exact (Fraction) or float64.
"""
from .backend import ScalarBackend, parse_scalar
from .canonical import (
    build_canonical,
    build_parasasakian,
    build_sasakian,
    canonical_sequence,
    einstein_rescale,
    einstein_weyl_check,
    eta_einstein_constants,
    fit_eta_einstein,
)
from .catalog import ModelDescriptor, model_heisenberg, model_kappa_mu, model_t1n
from .frame import FrameManifold, curvature, koszul_connection
from .kernels import KERNEL_BACKEND
from .legendre import libermann_map, pang_form, reves1_construct, reves1_para_construct
from .modelio import load_model, save_model
from .nullity import GateError, NullityCertificate, d_homothetic_deform, fit_nullity, pipeline
from .report import VerificationReport
from .structures import StructurePack, compute_h, validate_structure
from .synth import synthesize_brackets

__all__ = [
    "KERNEL_BACKEND",
    "ScalarBackend",
    "parse_scalar",
    "FrameManifold",
    "koszul_connection",
    "curvature",
    "StructurePack",
    "compute_h",
    "validate_structure",
    "NullityCertificate",
    "GateError",
    "fit_nullity",
    "pipeline",
    "d_homothetic_deform",
    "build_sasakian",
    "build_parasasakian",
    "build_canonical",
    "eta_einstein_constants",
    "fit_eta_einstein",
    "einstein_rescale",
    "einstein_weyl_check",
    "canonical_sequence",
    "pang_form",
    "libermann_map",
    "reves1_construct",
    "reves1_para_construct",
    "ModelDescriptor",
    "model_heisenberg",
    "model_t1n",
    "model_kappa_mu",
    "synthesize_brackets",
    "load_model",
    "save_model",
    "VerificationReport",
]
