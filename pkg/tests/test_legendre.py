from fractions import Fraction as F

import numpy as np
import pytest

from kappamu.canonical import build_parasasakian, build_sasakian
from kappamu.cli import _foliation_pair
from kappamu.frame import koszul_connection
from kappamu.legendre import (
    classify,
    foliation_suite,
    legendre_foliation,
    legendre_residuals,
    libermann_map,
    libermann_report,
    pang_form,
    pang_vs_canonical_metric,
    reves1_report,
    round_trip,
    totally_geodesic_check,
)
from kappamu.nullity import GateError, d_homothetic_deform

from conftest import get_model


class TestPang:
    def test_c2_factors(self, t1n_2):
        m, p, h = t1n_2.m, t1n_2.p, t1n_2.h
        for B, f in ((h.plus, 8), (h.minus, 4)):
            Pi, cls = pang_form(m, p.eta, p.xi, B)
            assert p.backend.max_abs(Pi - f * (B.T @ p.g @ B)) == 0
            assert cls == "nondegenerate"

    @pytest.mark.parametrize("key", [("t1n", "2"), ("t1n", "-1"), ("kmu", 2, "207/256", "-9/8"),
                                     ("kmu", 1, "-5/4", "-3"), ("kmu", 2, "16/25", "4")])
    def test_vs_canonical_metric(self, key):
        rep = pang_vs_canonical_metric(*get_model(key).args)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]

    def test_para_factor(self, t1n_m1):
        rep = pang_vs_canonical_metric(*t1n_m1.args)
        assert rep.data["factor"] == -4

    def test_flat_on_heisenberg(self, heis3):
        m, p = heis3.m, heis3.p
        B = np.array([[F(0)], [F(1)], [F(0)]], dtype=object)
        Pi, cls = pang_form(m, p.eta, p.xi, B)
        assert cls == "flat" and classify(p.backend, Pi) == "flat"

    def test_degenerate(self, exact):
        Pi = np.array([[F(1), F(0)], [F(0), F(0)]], dtype=object)
        assert classify(exact, Pi) == "degenerate"

    def test_rejects_non_legendre(self, t1n_2):
        m, p = t1n_2.m, t1n_2.p
        B = np.array([[F(1)], [F(0)], [F(0)]], dtype=object)
        assert legendre_residuals(m, p.eta, B)["in ker eta"] > 0
        with pytest.raises(ValueError):
            legendre_foliation(m, p.eta, p.xi, B)


class TestLibermann:
    @pytest.mark.parametrize("key", [("t1n", "2"), ("t1n", "-1"), ("kmu", 2, "207/256", "-9/8")])
    def test_invariants(self, key):
        M = get_model(key)
        for label, B in (("D(lambda)", M.h.plus), ("D(-lambda)", M.h.minus)):
            rep = libermann_report(M.m, M.p.eta, M.p.xi, B, label)
            assert rep.passed, [(c.name, c.residual) for c in rep.failures]

    def test_kills_xi_and_nilpotent(self, t1n_m1):
        m, p, B = t1n_m1.m, t1n_m1.p, t1n_m1.h.plus
        L = libermann_map(m, p.eta, p.xi, B)
        bk = p.backend
        assert bk.max_abs(L @ p.xi) == 0
        assert bk.max_abs(L @ L) == 0
        assert bk.max_abs(L @ B) == 0


class TestTotallyGeodesic:
    def test_eigendistributions(self, t1n_2):
        for label, B in (("+", t1n_2.h.plus), ("-", t1n_2.h.minus)):
            assert totally_geodesic_check(t1n_2.m, t1n_2.conn, B, label).passed

    def test_negative_control(self, t1n_2):
        B = np.array([[F(1), F(0)], [F(0), F(1)], [F(0), F(0)]], dtype=object)
        assert not totally_geodesic_check(t1n_2.m, t1n_2.conn, B, "span{xi, e1}").passed

    @pytest.mark.parametrize("key", [("t1n", "2"), ("t1n", "-1"), ("kmu", 2, "207/256", "-9/8"),
                                     ("t1n", "1/2", 2)])
    def test_suite(self, key):
        rep = foliation_suite(*get_model(key).args)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]


def _kpack(M):
    build = build_sasakian if M.cert.regime == "sasakian" else build_parasasakian
    q = build(*M.args)
    F1, F2 = _foliation_pair(q, M.h)
    mm = M.m.cast(q.backend) if M.m.backend != q.backend else M.m
    return q, mm, F1, F2


class TestConverse:
    @pytest.mark.parametrize("key", [("t1n", "2"), ("t1n", "-1"), ("kmu", 2, "207/256", "-9/8"),
                                     ("t1n", "1/2", 2)])
    def test_round_trip(self, key):
        rep = round_trip(*get_model(key).args)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]

    def test_round_trip_exact(self, t1n_m1):
        rep = round_trip(*t1n_m1.args)
        assert rep["round trip phi"].residual == 0 and rep["round trip g"].residual == 0

    def test_gives_minus_5_4(self):
        # Pi = 2 gbar on the c = 1/4 Sasakian metric; deforming by 1/2 makes it 4 gbar = sqrt(8 * 2) gbar
        M = get_model(("t1n", "1/4"))
        q, m, F1, F2 = _kpack(M)
        _, rep = reves1_report(d_homothetic_deform(q, F(1, 2)), m, F1, F2, 8, 2)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]
        assert (rep.data["kappa"], rep.data["mu"]) == (F(-5, 4), -3)

    def test_gives_3_4(self):
        # Pi = -gtil on the c = -1/16 paraSasakian metric, so a b = -1
        q, m, F1, F2 = _kpack(get_model(("t1n", "-1/16")))
        _, rep = reves1_report(q, m, F1, F2, 1, -1)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]
        assert (rep.data["kappa"], rep.data["mu"]) == (F(3, 4), 2)

    def test_c2_source(self, t1n_2):
        # Pi = sqrt(32) gbar, so a b = 32
        q, m, F1, F2 = _kpack(t1n_2)
        _, rep = reves1_report(q, m, F1, F2, 8, 4)
        assert rep.passed
        assert rep.data["kappa"] == pytest.approx(0, abs=1e-12) and rep.data["mu"] == pytest.approx(-4)

    @pytest.mark.parametrize("t", [F(1, 3), F(1, 2), F(2, 3), F(3, 4), F(5, 4), F(3, 2), F(2), F(5, 2), F(3), F(7, 2)])
    def test_random_pairs(self, t1n_m1, t):
        q, m, F1, F2 = _kpack(get_model(("t1n", "1/4")))
        a, b = 2 * t, 2 / t
        _, rep = reves1_report(q, m, F1, F2, a, b)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]
        assert rep.data["kappa"] == 1 - (a - b) ** 2 / 16
        assert rep.data["invariant"] == (a + b) / abs(a - b) or a == b
        q, m, F1, F2 = _kpack(t1n_m1)
        a, b = 4 * t, -4 / t
        _, rep = reves1_report(q, m, F1, F2, a, b)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]
        assert rep.data["mu"] == 2 - (a + b) / 2


class TestConverseDiagnostics:
    def test_a_equals_b(self, t1n_2):
        q, m, F1, F2 = _kpack(t1n_2)
        with pytest.raises(GateError, match="a = b"):
            reves1_report(q, m, F1, F2, 4, 4)

    def test_sign_of_ab(self, t1n_2, t1n_m1):
        q, m, F1, F2 = _kpack(t1n_2)
        with pytest.raises(GateError, match="a b <= 0"):
            reves1_report(q, m, F1, F2, 4, -4)
        q, m, F1, F2 = _kpack(t1n_m1)
        with pytest.raises(GateError, match="a b >= 0"):
            reves1_report(q, m, F1, F2, 4, 4 / F(2))

    def test_not_k_contact(self, t1n_2):
        F1, F2 = _foliation_pair(t1n_2.p, t1n_2.h)
        with pytest.raises(GateError, match="not K-contact"):
            reves1_report(t1n_2.p, t1n_2.m, F1, F2, 8, 4)

    def test_not_legendre(self, t1n_2):
        q, m, F1, F2 = _kpack(t1n_2)
        bad = F1 + np.array([[1.0], [0.0], [0.0]])
        with pytest.raises(GateError, match="F1 not Legendre"):
            reves1_report(q, m, bad, F2, 8, 4)

    def test_signature_violation(self, t1n_m1):
        q, m, F1, F2 = _kpack(t1n_m1)
        with pytest.raises(GateError, match="signature violation"):
            reves1_report(q, m, F1, F2, -4, 4)

    def test_pang_mismatch(self, t1n_2):
        q, m, F1, F2 = _kpack(t1n_2)
        with pytest.raises(GateError, match="Pang mismatch"):
            reves1_report(q, m, F1, F2, 8, 2)
