import math
from fractions import Fraction as F

import numpy as np
import pytest

from kappamu.backend import ScalarBackend
from kappamu.canonical import (
    EtaEinsteinConstants,
    build_canonical,
    build_parasasakian,
    build_sasakian,
    canonical_report,
    canonical_sequence,
    canonical_sequence_report,
    closed_form_connection,
    deformation_equivariance_report,
    dual_route_report,
    einstein_rescale,
    einstein_weyl_check,
    eta_einstein_constants,
    fit_eta_einstein,
    ricci_consistency_report,
    sectional_closed_form,
    sectional_profile,
    t1n_ricci_check,
    transverse_ricci_report,
)
from kappamu.frame import curvature, koszul_connection, sectional_curvature
from kappamu.structures import orthonormalize
from kappamu.nullity import GateError, pipeline
from kappamu.structures import normality_tensor

from conftest import get_model

SQ2 = math.sqrt(2)


class TestBuildSasakian:
    def test_metric_scaling_c2(self, t1n_2):
        q = build_sasakian(*t1n_2.args)
        # D(lambda) = e1, D(-lambda) = e2 in the catalog frame; gamma = 8/sqrt(32) = sqrt(2)
        assert q.g[1, 1] == pytest.approx(SQ2, abs=1e-12)
        assert q.g[2, 2] == pytest.approx(1 / SQ2, abs=1e-12)
        assert q.g[0, 0] == pytest.approx(1, abs=1e-12)

    def test_normal(self, t1n_2):
        q = build_sasakian(*t1n_2.args)
        assert q.backend.max_abs(normality_tensor(q, t1n_2.m.cast(q.backend))) <= 1e-12

    def test_report(self, t1n_2):
        rep = canonical_report(*t1n_2.args)
        assert rep.passed, [c.name for c in rep.failures]
        assert rep.data["signature"] == [0, 3]

    def test_refused_on_para_regime(self, t1n_m1):
        with pytest.raises(GateError, match=r"\|I\|>1 violated \(I=0\)"):
            build_sasakian(*t1n_m1.args)

    def test_boundary_refused(self):
        M = get_model(("t1n", "0"))
        assert M.cert.regime == "boundary"
        with pytest.raises(GateError):
            build_canonical(*M.args)

    def test_exact_when_root_rational(self, einstein5):
        q = build_sasakian(*einstein5.args)
        assert q.backend.exact


class TestBuildParaSasakian:
    def test_phi_is_half_phi_h(self, t1n_m1):
        q = build_parasasakian(*t1n_m1.args)
        p, h = t1n_m1.p, t1n_m1.h.h
        assert q.backend.max_abs(q.phi - p.phi @ h / 2) == 0

    def test_report(self, t1n_m1):
        rep = canonical_report(*t1n_m1.args)
        assert rep.passed, [c.name for c in rep.failures]
        assert rep.data["signature"] == [1, 2]

    def test_refused_on_sasakian_regime(self, t1n_2):
        with pytest.raises(GateError):
            build_parasasakian(*t1n_2.args)


class TestDualRoute:
    @pytest.mark.parametrize("key", [("t1n", "2"), ("t1n", "-1"), ("kmu", 2, "207/256", "-9/8"),
                                     ("t1n", "25/16", 2), ("kmu", 2, "16/25", "4"), ("t1n", "-1/2")])
    def test_agreement(self, key):
        rep = dual_route_report(*get_model(key).args)
        assert rep.passed, [(c.name, c.residual) for c in rep.failures]

    def test_exact_equality_cm1(self, t1n_m1):
        rep = dual_route_report(*t1n_m1.args)
        assert all(c.residual == 0 for c in rep.checks)

    def test_reeb_reeb_correction_vanishes(self, t1n_2):
        cf = closed_form_connection(*t1n_2.args, "sasakian")
        assert np.abs(np.asarray(cf.gamma[0, 0], dtype=float)).max() <= 1e-12


class TestEtaEinstein:
    def test_closed_form_cm1(self, t1n_m1):
        # printed formula: (-n sqrt(-alpha) + 3, n sqrt(-alpha) - 2n - 3)
        assert eta_einstein_constants(t1n_m1.cert, 1, "parasasakian").to_dict() == {"a": -1, "b": -1}

    def test_sasaki_einstein_5d(self, einstein5):
        consts = eta_einstein_constants(einstein5.cert, 2, "sasakian")
        assert (consts.a, consts.b) == (4, 0)
        q = build_sasakian(*einstein5.args)
        fitted, res = fit_eta_einstein(q, einstein5.m)
        assert res == 0 and (fitted.a, fitted.b) == (4, 0)

    def test_sasakian_ricci_consistency(self, t1n_2):
        assert ricci_consistency_report(*t1n_2.args).passed

    @pytest.mark.parametrize("key", [("t1n", "-1"), ("kmu", 1, "-1425/256", "25/8")])
    def test_para_ricci_matches_closed_form(self, key):
        # Koszul-route Ricci against the printed paraSasakian constants
        rep = ricci_consistency_report(*get_model(key).args)
        assert rep["eta-Einstein"].passed
        assert rep.passed, rep.data

    def test_para_fitted_constants(self, t1n_m1, para1425):
        # measured values, independent of any closed form
        for M, want in ((t1n_m1, (-2, 0)), (para1425, (-3, 1))):
            q = build_parasasakian(*M.args)
            fitted, res = fit_eta_einstein(q, M.m)
            assert res == 0 and (fitted.a, fitted.b) == want
            assert fitted.a + fitted.b == -2

    def test_para_ricci_from_sectional_curvatures(self, t1n_m1):
        # dim 3 oracle: Ric(X,X) = g(X,X) * sum of K(X, e_j) over the other two frame directions
        q = build_parasasakian(*t1n_m1.args)
        curv = curvature(t1n_m1.m, koszul_connection(t1n_m1.m, q.g), q.g)
        E = orthonormalize(q.backend, np.eye(3, dtype=object) * F(1), q.g)
        for i in range(3):
            X = E[:, i]
            others = [E[:, j] for j in range(3) if j != i]
            ric = (X @ q.g @ X) * sum(sectional_curvature(curv, q.g, X, Y) for Y in others)
            assert ric == X @ curv.ricci @ X
        xi, X = E[:, 0], E[:, 1]
        assert X @ curv.ricci @ X == -2 * (X @ q.g @ X)
        assert xi @ curv.ricci @ xi == -2

    def test_transverse(self, t1n_2, einstein5):
        assert transverse_ricci_report(*t1n_2.args).passed
        assert transverse_ricci_report(*einstein5.args).passed


class TestT1NRicci:
    def test_sasakian_threshold_n2(self):
        rep = t1n_ricci_check(F(9, 16), 2)
        assert rep.passed and rep.data["einstein"]

    def test_c2_eta_einstein_not_einstein(self):
        rep = t1n_ricci_check(F(2), 1)
        assert rep.passed and not rep.data["einstein"]
        assert rep.data["closed_form"]["b"] == pytest.approx(-math.sqrt(32) + 4)

    def test_para_threshold_n1(self):
        rep = t1n_ricci_check(F(-25, 16), 1)
        assert rep.data["einstein"], rep.data
        assert rep.passed

    @pytest.mark.parametrize("c", [F(0), F(1)])
    def test_excluded(self, c):
        with pytest.raises(GateError):
            t1n_ricci_check(c)


class TestSectional:
    def test_c2_profile(self, t1n_2):
        r = math.sqrt(32)
        prof, rep = sectional_profile(*t1n_2.args, "sasakian")
        assert prof.as_tuple() == pytest.approx((1, r, r - 3, r - 3))
        assert rep.passed

    def test_cm1_profile(self, t1n_m1):
        prof, rep = sectional_profile(*t1n_m1.args, "parasasakian")
        assert prof.as_tuple() == (-1, -4, -1, -1)
        assert rep.passed

    def test_phi_sectional_reading_eps(self):
        # eps = -1 model: only the eps sqrt(alpha) - 3 reading matches
        M = get_model(("kmu", 2, "16/25", "4"))
        assert M.cert.epsilon == -1
        _, rep = sectional_profile(*M.args, "sasakian")
        assert rep.passed
        assert rep.data["phi_sectional_readings"] == {"sqrt(alpha)-3": False, "eps*sqrt(alpha)-3": True}

    def test_within_planes_sampled_n2(self, einstein5):
        _, rep = sectional_profile(*einstein5.args, "sasakian")
        assert rep.passed and rep.data["within_sampled"]

    def test_gate(self, t1n_m1):
        with pytest.raises(GateError):
            sectional_closed_form(t1n_m1.cert, "sasakian")


class TestRescale:
    def test_c2_sqrt2(self, t1n_2):
        q = build_sasakian(*t1n_2.args)
        consts, _ = fit_eta_einstein(q, t1n_2.m.cast(q.backend))
        c, deformed, rep = einstein_rescale(q, t1n_2.m, consts, "sasakian")
        assert rep.passed
        assert c == pytest.approx(SQ2, abs=1e-12)
        new, _ = fit_eta_einstein(deformed, t1n_2.m.cast(deformed.backend))
        assert abs(new.b) <= 1e-10

    def test_already_einstein(self, einstein5):
        q = build_sasakian(*einstein5.args)
        c, _, rep = einstein_rescale(q, einstein5.m, EtaEinsteinConstants(F(4), F(0)), "sasakian")
        assert c == 1 and rep.passed

    def test_sasakian_needs_a_above_minus_2(self, t1n_2):
        q = build_sasakian(*t1n_2.args)
        with pytest.raises(GateError, match="a > -2"):
            einstein_rescale(q, t1n_2.m, EtaEinsteinConstants(-3.0, 5.0), "sasakian")

    def test_para_refused_when_n_root_is_one(self):
        # c = -1/16: alpha = -1, n sqrt(-alpha) = 1, printed scalar curvature 2n
        M = get_model(("t1n", "-1/16"))
        q = build_parasasakian(*M.args)
        consts = eta_einstein_constants(M.cert, 1, "parasasakian")
        with pytest.raises(GateError, match="scalar curvature"):
            einstein_rescale(q, M.m, consts, "parasasakian")

    def test_para_fitted_route_at_printed_obstruction(self):
        M = get_model(("t1n", "-1/16"))
        q = build_parasasakian(*M.args)
        consts, _ = fit_eta_einstein(q, M.m)
        assert (consts.a, consts.b) == (1, -3)
        c, deformed, rep = einstein_rescale(q, M.m, consts, "parasasakian")
        assert rep.passed and c == F(1, 4)
        assert fit_eta_einstein(deformed, M.m)[0].b == 0

    def test_para_fitted_route(self, t1n_m1):
        q = build_parasasakian(*t1n_m1.args)
        consts, _ = fit_eta_einstein(q, t1n_m1.m)
        c, _, rep = einstein_rescale(q, t1n_m1.m, consts, "parasasakian")
        assert rep.passed and c == 1


class TestEquivariance:
    @pytest.mark.parametrize("c", [F(2), F(1, 3), F(9, 4)])
    def test_c2_model(self, t1n_2, c):
        assert deformation_equivariance_report(t1n_2.p, t1n_2.m, c).passed

    def test_para_model(self, t1n_m1):
        rep = deformation_equivariance_report(t1n_m1.p, t1n_m1.m, F(4))
        assert rep.passed and all(ch.residual == 0 for ch in rep.checks)


class TestWeyl:
    def test_einstein_tau_zero(self, einstein5):
        q = build_sasakian(*einstein5.args)
        rep = einstein_weyl_check(q, einstein5.m)
        assert rep.passed and rep.data["route"] == "einstein"
        assert abs(rep.data["tau"]) <= 1e-6

    def test_nonzero_tau(self, weyl5):
        q = build_sasakian(*weyl5.args)
        rep = einstein_weyl_check(q, weyl5.m)
        assert rep.passed and rep.data["route"] == "direct"
        assert abs(rep.data["tau"]) > 0.1 and rep.data["defect"] <= 1e-8

    def test_after_rescale(self):
        M = get_model(("t1n", "1/2", 2))
        q = build_sasakian(*M.args)
        rep = einstein_weyl_check(q, M.m)
        assert rep.passed and rep.data["route"] == "after-rescale"

    def test_dim3_refused(self, t1n_2):
        q = build_sasakian(*t1n_2.args)
        with pytest.raises(GateError, match="dimension"):
            einstein_weyl_check(q, t1n_2.m)


class TestSequence:
    def test_periodicity(self, t1n_m1):
        packs = canonical_sequence(*t1n_m1.args, 5)
        bk = packs[1].backend
        assert bk.max_abs(packs[4].phi - packs[2].phi) == 0
        assert bk.max_abs(packs[5].phi - packs[1].phi) == 0
        assert bk.max_abs(packs[3].phi - packs[1].phi) == 0

    def test_pack2_constants(self, t1n_m1):
        packs = canonical_sequence(*t1n_m1.args, 2)
        _, _, _, cert = pipeline(packs[2], t1n_m1.m)
        assert (cert.kappa, cert.mu) == (-3, 2)

    def test_report(self, t1n_m1, para1425):
        assert canonical_sequence_report(*t1n_m1.args, 5).passed
        assert canonical_sequence_report(*para1425.args, 5).passed

    def test_refused_for_sasakian_regime(self, t1n_2):
        with pytest.raises(GateError):
            canonical_sequence(*t1n_2.args, 3)
