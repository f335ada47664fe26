from fractions import Fraction as F

import numpy as np
import pytest

from kappamu.canonical import build_parasasakian, build_sasakian
from kappamu.nullity import associated_paracontact_pair
from kappamu.structures import (
    StructurePack,
    compute_h,
    h_invariant_residuals,
    normality_tensor,
    orthonormalize,
    para_normality_by_foliation,
    validate_structure,
)

from conftest import get_model

CATALOG_KEYS = [("heisenberg", 1), ("heisenberg", 2), ("t1n", "2"), ("t1n", "-1"), ("t1n", "1/3"),
                ("kmu", 2, "207/256", "-9/8"), ("kmu", 2, "16/25", "4")]


class TestValidate:
    def test_heisenberg_passes_exactly(self, heis3):
        rep = validate_structure(heis3.p, heis3.m)
        assert rep.passed
        assert all(c.residual == 0 for c in rep.checks)

    def test_phi_sign_flip_on_one_vector_fails(self, heis3):
        phi = heis3.p.phi.copy()
        phi[:, 1] = -phi[:, 1]
        rep = validate_structure(heis3.p.replace(phi=phi), heis3.m)
        assert not rep["phi squared"].passed

    def test_parasasakian_pack(self, t1n_m1):
        q = build_parasasakian(*t1n_m1.args)
        rep = validate_structure(q, t1n_m1.m)
        assert rep.passed
        assert rep.data["signature"] == [1, 2]

    def test_dimension_mismatch(self, heis3):
        bk = heis3.p.backend
        with pytest.raises(ValueError, match="dimension"):
            StructurePack("contact", bk.eye(3), bk.eye(5)[0], bk.eye(5)[0], bk.eye(5), bk)

    def test_unknown_kind(self, heis3):
        with pytest.raises(ValueError):
            heis3.p.replace(kind="almost-complex")

    @pytest.mark.parametrize("key", CATALOG_KEYS)
    def test_catalog_models_valid(self, key):
        M = get_model(key)
        assert validate_structure(M.p, M.m).passed


class TestH:
    def test_heisenberg_h_vanishes(self, heis5):
        assert heis5.h.vanishes

    def test_t1n_c2_lambda_one(self, t1n_2):
        assert t1n_2.h.lam == 1
        assert t1n_2.h.plus.shape[1] == t1n_2.h.minus.shape[1] == 1

    def test_t1n_cm1_lambda_two(self, t1n_m1):
        assert t1n_m1.h.lam == 2

    @pytest.mark.parametrize("key", CATALOG_KEYS)
    def test_invariants(self, key):
        M = get_model(key)
        res = h_invariant_residuals(M.p, M.h.h)
        assert all(v == 0 for v in res.values()), res

    def test_h_squared(self, einstein5):
        p, h = einstein5.p, einstein5.h.h
        kappa = einstein5.cert.kappa
        assert p.backend.max_abs(h @ h + (1 - kappa) * p.phi @ p.phi) == 0


class TestNormality:
    def test_heisenberg_normal(self, heis3):
        assert heis3.p.backend.max_abs(normality_tensor(heis3.p, heis3.m)) == 0

    def test_t1n_not_normal(self, t1n_2):
        assert t1n_2.p.backend.max_abs(normality_tensor(t1n_2.p, t1n_2.m)) > 0

    def test_canonical_sasakian_normal(self, t1n_2):
        q = build_sasakian(*t1n_2.args)
        assert q.backend.max_abs(normality_tensor(q, t1n_2.m.cast(q.backend))) <= 1e-12

    def test_para_foliation_passes(self, t1n_m1):
        q = build_parasasakian(*t1n_m1.args)
        rep = para_normality_by_foliation(q, t1n_m1.m)
        assert rep.passed and rep.data["normality_residual"] == 0

    def test_pair2_generic_fails(self, t1n_2):
        _, pack2 = associated_paracontact_pair(*t1n_2.args)
        rep = para_normality_by_foliation(pack2, t1n_2.m)
        assert rep["agrees with normality tensor"].passed
        assert rep.data["normality_residual"] > 0
        assert not all(c.passed for c in rep.checks if c.name != "agrees with normality tensor")

    def test_pair1_when_I_zero(self, t1n_m1):
        # I = 0 (mu = 2): pack 1 is paraSasakian and the two tests agree
        pack1, _ = associated_paracontact_pair(*t1n_m1.args)
        rep = para_normality_by_foliation(pack1, t1n_m1.m)
        assert rep["agrees with normality tensor"].passed
        assert rep.data["normality_residual"] == 0

    @pytest.mark.parametrize("key", [("t1n", "2"), ("t1n", "-1"), ("t1n", "1/3"), ("kmu", 1, "3/4", "2")])
    def test_foliation_agrees_with_tensor_on_pairs(self, key):
        M = get_model(key)
        for pack in associated_paracontact_pair(*M.args):
            rep = para_normality_by_foliation(pack, M.m.cast(pack.backend))
            assert rep["agrees with normality tensor"].passed

    def test_contact_pack_refused(self, t1n_2):
        with pytest.raises(ValueError):
            para_normality_by_foliation(t1n_2.p, t1n_2.m)


class TestOrthonormalize:
    def test_exact_gram_schmidt(self, exact):
        g = exact.eye(3)
        B = exact.array([[0, 0], [1, 1], [0, 1]])
        Q = orthonormalize(exact, B, g)
        assert exact.max_abs(Q.T @ g @ Q - exact.eye(2)) == 0
        assert Q[1, 0] > 0

    def test_negative_definite_block(self, exact):
        g = -exact.eye(2)
        Q = orthonormalize(exact, exact.array([[3, 0], [4, 5]]), g)
        assert exact.max_abs(Q.T @ g @ Q + exact.eye(2)) == 0
