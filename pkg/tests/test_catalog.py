import json
from fractions import Fraction as F

import numpy as np
import pytest

from kappamu.backend import ScalarBackend, parse_scalar
from kappamu.catalog import (
    family_model,
    frozen_catalog,
    frozen_targets,
    model_heisenberg,
    model_kappa_mu,
    model_t1n,
    t1n_constants,
    t1n_invariant,
)
from kappamu.modelio import ModelFileError, load_model, model_document, parse_model, save_model
from kappamu.nullity import boeckx_invariant, pipeline
from kappamu.synth import SynthesisError, synthesize_brackets

C_VALUES = ["2", "-1", "-3", "-1/2", "1/2", "3", "1/3", "7/5", "-25/16", "9/16"]


class TestT1N:
    @pytest.mark.parametrize("c", C_VALUES)
    def test_certificate(self, c):
        c = F(c)
        desc = model_t1n(c)
        _, _, _, cert = pipeline(desc.pack, desc.manifold)
        assert cert.exact and cert.is_kmu and cert.residual == 0
        assert (cert.kappa, cert.mu) == t1n_constants(c)
        assert cert.invariant == t1n_invariant(c)
        assert cert.regime == ("sasakian" if c > 0 else "parasasakian")

    def test_jacobi(self):
        assert model_t1n(F(2)).manifold.jacobi_residual() == 0

    def test_c1_refused(self):
        with pytest.raises(ValueError, match="Sasakian"):
            model_t1n(F(1))

    def test_n2(self):
        desc = model_t1n(F(1, 2), 2)
        _, _, _, cert = pipeline(desc.pack, desc.manifold)
        assert desc.manifold.dim == 5 and (cert.kappa, cert.mu) == (F(3, 4), -1)


class TestFrozenCatalog:
    def test_targets_present(self):
        keys = {(e["n"], parse_scalar(e["kappa"]), parse_scalar(e["mu"])) for e in frozen_catalog()}
        assert set(frozen_targets()) <= keys

    def test_entries_reverify(self, exact):
        for e in frozen_catalog():
            assert e["scalars"] == "rational"
            m, p = family_model(e["n"], [parse_scalar(v) for v in e["params"]], exact)
            assert m.jacobi_residual() == 0
            _, _, _, cert = pipeline(p, m)
            assert cert.residual == 0
            assert (cert.kappa, cert.mu) == (parse_scalar(e["kappa"]), parse_scalar(e["mu"]))


class TestHeisenberg:
    @pytest.mark.parametrize("n", [1, 2])
    def test_sasakian_input(self, n):
        desc = model_heisenberg(n)
        _, _, h, cert = pipeline(desc.pack, desc.manifold)
        assert cert.kappa == 1 and cert.mu is None
        assert cert.regime == "sasakian-input"


class TestSynthesis:
    def test_deterministic(self):
        a = synthesize_brackets(1, 0.3, 1.7)
        b = synthesize_brackets(1, 0.3, 1.7)
        assert np.array_equal(a.manifold.brackets, b.manifold.brackets)
        assert a.certificate["nullity_residual"] <= 1e-10

    def test_matches_t1n(self):
        desc = synthesize_brackets(1, F(0), F(-4), backend=ScalarBackend("exact"))
        _, _, _, cert = pipeline(desc.pack, desc.manifold)
        _, _, _, ref = pipeline(model_t1n(F(2)).pack, model_t1n(F(2)).manifold)
        assert (cert.kappa, cert.mu, cert.invariant) == (ref.kappa, ref.mu, ref.invariant)

    def test_boeckx_preserved_n2(self):
        desc = synthesize_brackets(2, 0.5, 0.25)
        _, _, _, cert = pipeline(desc.pack, desc.manifold)
        assert cert.invariant == pytest.approx(boeckx_invariant(0.5, 0.25), abs=1e-9)

    @pytest.mark.parametrize("kappa", [1, 2])
    def test_kappa_at_least_one_refused(self, kappa):
        with pytest.raises(ValueError, match="kappa < 1"):
            model_kappa_mu(1, F(kappa), F(0))

    def test_no_budget(self):
        with pytest.raises(SynthesisError):
            synthesize_brackets(1, 0.3, 1.7, budget=1)


class TestModelFiles:
    def test_round_trip(self, tmp_path, t1n_m1):
        path = tmp_path / "m.json"
        save_model(t1n_m1.desc, path)
        desc, rep = load_model(path)
        assert rep.passed
        assert desc.pack.backend.exact
        assert desc.manifold.backend.max_abs(desc.manifold.brackets - t1n_m1.m.brackets) == 0
        assert model_document(desc) == model_document(t1n_m1.desc) | {"name": desc.name}

    def test_float_round_trip(self, tmp_path):
        desc = synthesize_brackets(1, 0.3, 1.7)
        path = tmp_path / "f.json"
        save_model(desc, path)
        back, rep = load_model(path)
        assert rep.passed and not back.pack.backend.exact

    def _doc(self, t1n_m1):
        return json.loads(json.dumps(model_document(t1n_m1.desc)))

    def test_broken_jacobi(self, t1n_m1):
        doc = self._doc(t1n_m1)
        doc["brackets"][0][1][1] = "1"
        doc["brackets"][1][0][1] = "-1"
        rep = load_model_from(doc)
        assert not rep["Jacobi identity"].passed

    def test_false_claim(self, t1n_m1):
        doc = self._doc(t1n_m1)
        doc["claims"]["kappa"] = "5"
        rep = load_model_from(doc)
        assert not rep["claimed kappa"].passed and rep["claimed mu"].passed

    def test_mixed_scalars(self, t1n_m1):
        doc = self._doc(t1n_m1)
        doc["metric"][0][0] = 1.0
        with pytest.raises(ModelFileError, match=r"metric\[0\]\[0\].*mixing rational and float"):
            parse_model(doc)

    @pytest.mark.parametrize("field", ["phi", "claims", "dim"])
    def test_missing_field(self, t1n_m1, field):
        doc = self._doc(t1n_m1)
        del doc[field]
        with pytest.raises(ModelFileError, match=field):
            parse_model(doc)

    def test_bad_shape(self, t1n_m1):
        doc = self._doc(t1n_m1)
        doc["xi"] = ["1", "0"]
        with pytest.raises(ModelFileError, match="xi"):
            parse_model(doc)

    def test_unknown_field(self, t1n_m1):
        doc = self._doc(t1n_m1)
        doc["extra"] = 1
        with pytest.raises(ModelFileError, match="extra"):
            parse_model(doc)

    def test_json_syntax_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n "dim": 3,\n oops\n}\n')
        with pytest.raises(ModelFileError, match="line 3"):
            load_model(path)


def load_model_from(doc):
    from kappamu.modelio import verification_report
    return verification_report(parse_model(doc))
