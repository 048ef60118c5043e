import numpy as np
import pytest

from twochan import (
    CheckResult,
    DecoupledChannel,
    IncompleteEigensystemError,
    InvalidParamsError,
    SolverConfig,
    SpectralReport,
    ToleranceProfile,
    TwoChannelHamiltonian,
    build_channel,
    check_biorthogonality,
    check_completeness,
    full_report,
    render_report,
    solve,
)

H1_SCALAR = 1.0 - np.sqrt(5.0) / 2.0
H2_SCALAR = 1.0 + np.sqrt(5.0) / 2.0

ADMISSIBLE_CHECKS = [
    "contraction_bound",
    "fixed_point_residual",
    "riccati_residual",
    "ball_membership",
    "spectrum_reality",
    "basic_equation",
    "block_diagonalization",
    "transform_unitarity",
    "hermitian_form",
    "spectrum_match",
    "spectrum_disjoint",
    "biorthogonality",
    "completeness",
    "original_problem",
]


def make_channel(vectors, duals, values=None):
    vectors = np.asarray(vectors, dtype=complex)
    duals = np.asarray(duals, dtype=complex)
    n = vectors.shape[0]
    if values is None:
        values = np.arange(n, dtype=complex)
    return DecoupledChannel(
        alpha=1,
        h_alpha=np.eye(n, dtype=complex),
        w_alpha=np.zeros((n, n), dtype=complex),
        eigenvalues=np.asarray(values, dtype=complex),
        right_vectors=vectors,
        left_duals=duals,
    )


class TestToleranceProfile:
    def test_defaults(self):
        tol = ToleranceProfile()
        assert tol.riccati == 1e-10
        assert tol.spectrum_match == 1e-9

    def test_from_dict_overrides(self):
        tol = ToleranceProfile.from_dict({"riccati": 1e-8})
        assert tol.riccati == 1e-8
        assert tol.fixed_point == 1e-10

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(InvalidParamsError, match="unknown keys"):
            ToleranceProfile.from_dict({"riccatti": 1e-8})

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidParamsError):
            ToleranceProfile(riccati=0.0)
        with pytest.raises(InvalidParamsError):
            ToleranceProfile(unitarity=-1e-10)
        with pytest.raises(InvalidParamsError):
            ToleranceProfile(reality=float("nan"))

    def test_rejects_non_numbers(self):
        with pytest.raises(InvalidParamsError):
            ToleranceProfile(completeness=True)
        with pytest.raises(InvalidParamsError):
            ToleranceProfile.from_dict({"completeness": "tight"})

    def test_dict_roundtrip(self):
        tol = ToleranceProfile(basic_equation=2e-9)
        assert ToleranceProfile.from_dict(tol.to_dict()) == tol


class TestCheckHelpers:
    def test_biorthogonality_exact_identity(self):
        ch = make_channel(np.eye(3), np.eye(3))
        assert check_biorthogonality(ch) == 0.0

    def test_biorthogonality_measures_offdiagonal(self):
        duals = np.eye(2) + np.array([[0.0, 0.25], [0.0, 0.0]])
        ch = make_channel(np.eye(2), duals)
        assert check_biorthogonality(ch) == pytest.approx(0.25)

    def test_biorthogonality_measures_diagonal(self):
        ch = make_channel(np.eye(2), np.diag([1.0, 0.5]))
        assert check_biorthogonality(ch) == pytest.approx(0.5)

    def test_completeness_exact_identity(self):
        ch = make_channel(np.eye(3), np.eye(3))
        assert check_completeness(ch) == 0.0

    def test_completeness_scaled_resolution(self):
        ch = make_channel(np.eye(2), 2.0 * np.eye(2))
        # resolution is 2 I, so the defect is the HS norm of I
        assert check_completeness(ch) == pytest.approx(np.sqrt(2.0))

    def test_completeness_requires_full_eigensystem(self):
        short = DecoupledChannel(
            alpha=1,
            h_alpha=np.eye(2, dtype=complex),
            w_alpha=np.zeros((2, 2), dtype=complex),
            eigenvalues=np.array([1.0 + 0.0j]),
            right_vectors=np.array([[1.0], [0.0]], dtype=complex),
            left_duals=np.array([[1.0], [0.0]], dtype=complex),
        )
        with pytest.raises(IncompleteEigensystemError):
            check_completeness(short)

    def test_on_solved_channel(self, random_h):
        ch = build_channel(random_h, solve(random_h, 1))
        assert check_biorthogonality(ch) <= 1e-12
        assert check_completeness(ch) <= 1e-12


class TestFullReportAdmissible:
    def test_scalar_passes(self, scalar_h):
        report = full_report(scalar_h)
        assert report.verdict
        assert report.admissible
        assert report.guaranteed
        assert not report.override
        assert [c.name for c in report.checks] == ADMISSIBLE_CHECKS
        assert all(c.passed for c in report.checks)

    def test_scalar_spectrum_values(self, scalar_h):
        report = full_report(scalar_h)
        np.testing.assert_allclose(report.spectrum["full"], [H1_SCALAR, H2_SCALAR], atol=1e-12)
        np.testing.assert_allclose(report.spectrum["channel1"], [H1_SCALAR], atol=1e-12)
        np.testing.assert_allclose(report.spectrum["channel2"], [H2_SCALAR], atol=1e-12)
        assert report.check("spectrum_match").value <= 1e-12
        assert report.check("spectrum_disjoint").value == pytest.approx(np.sqrt(5.0), rel=1e-12)

    def test_uncoupled_all_defects_tiny(self, uncoupled_h):
        report = full_report(uncoupled_h)
        assert report.verdict
        assert report.max_defect() <= 1e-13

    def test_degenerate_cluster_instance(self, degenerate_h):
        report = full_report(degenerate_h)
        assert report.verdict
        assert report.check("biorthogonality").value <= 1e-12
        assert report.check("completeness").value <= 1e-12

    def test_random_instance(self, random_h):
        report = full_report(random_h)
        assert report.verdict
        assert report.max_defect() <= 1e-10
        assert report.riccati["channel1"]["iterations"] >= 1
        assert report.riccati["channel2"]["iterations"] == report.riccati["channel1"]["iterations"]
        assert report.riccati["error"] is None

    def test_independent_solve_adds_cross_check(self, random_h):
        report = full_report(random_h, independent_solve=True)
        names = [c.name for c in report.checks]
        assert names == ADMISSIBLE_CHECKS + ["cross_channel_consistency"]
        cross = report.check("cross_channel_consistency")
        assert cross.passed
        assert cross.value <= 1e-9
        assert report.riccati["independent_channel2"]["channel"] == 2

    def test_header_fields(self, scalar_h):
        report = full_report(scalar_h)
        assert report.n1 == 1 and report.n2 == 2 - 1
        assert report.d0 == pytest.approx(2.0)
        assert report.b_hs_norm == pytest.approx(0.5)
        assert report.contraction_margin == pytest.approx(0.5)
        assert report.admissibility_bound == pytest.approx(1.0)
        assert report.sigma1 == (0.0,)
        assert report.sigma2 == (2.0,)
        assert len(report.instance_digest) == 64

    def test_check_lookup(self, scalar_h):
        report = full_report(scalar_h)
        assert report.check("riccati_residual").name == "riccati_residual"
        with pytest.raises(KeyError):
            report.check("no_such_check")


class TestFullReportInadmissible:
    @pytest.fixture()
    def hot_h(self):
        return TwoChannelHamiltonian(a1=[[0.0]], a2=[[2.0]], b12=[[1.5]])

    def test_blocked_without_override(self, hot_h):
        report = full_report(hot_h)
        assert not report.verdict
        assert not report.admissible
        assert not report.guaranteed
        gate = report.check("contraction_bound")
        assert not gate.passed
        assert "override" in gate.note
        assert report.riccati["error"] == "skipped: instance not admissible"
        assert report.riccati["channel1"] is None
        skipped = report.check("riccati_residual")
        assert skipped.value is None and not skipped.passed
        assert report.max_defect() is None

    def test_blocked_omits_ball_check(self, hot_h):
        report = full_report(hot_h)
        names = [c.name for c in report.checks]
        assert "ball_membership" not in names

    def test_override_proceeds_nonguaranteed(self, hot_h):
        report = full_report(hot_h, allow_inadmissible=True)
        assert report.verdict
        assert report.override
        assert not report.guaranteed
        names = [c.name for c in report.checks]
        assert "contraction_bound" not in names
        assert "ball_membership" not in names
        assert report.check("riccati_residual").passed
        assert not report.riccati["channel1"]["admissible"]

    def test_override_render_flags_regime(self, hot_h):
        text = full_report(hot_h, allow_inadmissible=True).render()
        assert "NON-GUARANTEED" in text
        assert "verdict: PASS" in text


class TestFullReportFailureModes:
    def test_solver_not_converged_recorded(self, scalar_h):
        report = full_report(scalar_h, SolverConfig(max_iterations=1))
        assert not report.verdict
        assert "1" in report.riccati["error"]
        assert report.check("fixed_point_residual").value is None
        assert report.check("fixed_point_residual").note == report.riccati["error"]

    def test_corrupted_override_fails_riccati_check(self, random_h):
        good = solve(random_h, 1)
        corrupted = np.array(good.q) + 1e-3
        report = full_report(random_h, q_override=corrupted)
        assert not report.verdict
        assert not report.check("riccati_residual").passed
        assert report.check("riccati_residual").value > 1e-4
        assert report.riccati["channel1"]["iterations"] == 0

    def test_exact_override_passes(self, random_h):
        good = solve(random_h, 1)
        report = full_report(random_h, q_override=good.q)
        assert report.verdict
        assert report.riccati["channel1"]["iterations"] == 0

    def test_complex_override_fails_reality(self, scalar_h):
        report = full_report(scalar_h, q_override=[[5.0j]])
        assert not report.verdict
        reality = report.check("spectrum_reality")
        assert not reality.passed
        assert reality.value == pytest.approx(2.5)
        assert report.check("basic_equation").value is None


class TestReportSerialization:
    def test_json_bytes_deterministic(self, random_h):
        a = full_report(random_h, independent_solve=True).to_json_bytes()
        b = full_report(random_h, independent_solve=True).to_json_bytes()
        assert a == b

    def test_dict_shape(self, scalar_h):
        doc = full_report(scalar_h).to_dict()
        assert doc["schema_version"] == 1
        assert doc["kind"] == "verification-report"
        assert doc["verdict"] == "pass"
        assert [c["name"] for c in doc["checks"]] == ADMISSIBLE_CHECKS
        assert doc["notes"]
        assert isinstance(doc["riccati"]["channel1"]["iterations"], int)

    def test_render_lists_every_check(self, scalar_h):
        report = full_report(scalar_h)
        text = report.render()
        assert render_report(report) == text
        assert text.count("PASS") == len(report.checks) + 1
        assert "verdict: PASS" in text
        assert "admissible" in text

    def test_render_failure(self, scalar_h):
        text = full_report(scalar_h, SolverConfig(max_iterations=1)).render()
        assert "verdict: FAIL" in text
        assert "FAIL" in text
        assert "solver:" in text

    def test_check_result_is_plain_data(self):
        entry = CheckResult(name="x", passed=True, value=1.0, tolerance=2.0)
        doc = entry.to_dict()
        assert doc == {
            "name": "x",
            "passed": True,
            "value": 1.0,
            "tolerance": 2.0,
            "comparison": "<=",
            "note": "",
        }

    def test_report_is_frozen(self, scalar_h):
        report = full_report(scalar_h)
        with pytest.raises(AttributeError):
            report.verdict = False
        assert isinstance(report, SpectralReport)
