"""Property-suite runner and report serialization."""

import json
import math

from perpregime.figures import property_suite_cases
from perpregime.verification import (
    VerificationReport,
    check_critical_lambda_reference,
    run_property_suite,
)


class TestSuiteRuns:
    def test_default_cases_all_pass(self):
        cases, ids = property_suite_cases()
        report = run_property_suite(cases, case_ids=ids)
        failed = report.failures()
        assert report.all_passed, [f"{r.case_id}:{r.check}" for r in failed]
        checks = {r.check for r in report.results}
        assert {"boundary_ordering", "smooth_pasting_analytic",
                "smooth_pasting_fd", "branch_continuity", "ode_residual",
                "payoff_dominance", "monotonicity"} <= checks

    def test_corrupted_tolerances_fail(self):
        cases, ids = property_suite_cases()
        report = run_property_suite(cases[:3], tolerance_scale=1e-12,
                                    case_ids=ids[:3])
        assert not report.all_passed
        assert report.failures()

    def test_critical_lambda_reference(self):
        report = VerificationReport()
        check_critical_lambda_reference(report)
        (row,) = report.results
        assert row.passed
        assert row.measured <= 1e-3


class TestSerialization:
    def test_json_schema(self):
        cases, ids = property_suite_cases()
        report = run_property_suite(cases[:2], case_ids=ids[:2])
        payload = json.loads(report.to_json())
        assert payload["all_passed"] is True
        for row in payload["results"]:
            assert set(row) == {"case_id", "check", "measured", "tolerance", "pass"}
            assert isinstance(row["pass"], bool)

    def test_nonfinite_tolerances_serialize_as_strings(self):
        report = VerificationReport()
        report.add("demo", "reported_only", 1.5, math.inf)
        row = json.loads(report.to_json())["results"][0]
        assert row["tolerance"] == "inf"
        assert row["pass"] is True
