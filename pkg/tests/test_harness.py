import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcut.benchmarks import BenchmarkSpec, bv, generate_benchmark
from qcut.dynamic import DDConfig
from qcut.harness import (
    RunReport,
    VerificationError,
    chi_squared,
    compare_report,
    run_pipeline,
    shots_chi2_threshold,
    total_variation,
    write_outputs,
)
from qcut.search import Infeasible
from qcut.simulator import read_binary


def test_chi_squared_examples():
    assert chi_squared([0.2, 0.8], [0.2, 0.8]) == 0
    assert chi_squared([1, 0], [0, 1]) == pytest.approx(2.0)
    assert chi_squared([0.5, 0.5, 0, 0], [0.25] * 4) == pytest.approx(0.0625 / 0.75 * 2 + 0.0625 / 0.25 * 2, abs=1e-9)
    assert chi_squared([0.5, 0.5, 0, 0], [0.25] * 4) == pytest.approx(0.6667, abs=1e-4)


def test_chi_squared_zero_over_zero():
    assert chi_squared([0.0, 1.0], [0.0, 1.0]) == 0.0


def test_chi_squared_errors():
    with pytest.raises(ValueError):
        chi_squared([0.5, 0.5], [1.0])
    with pytest.raises(ValueError):
        chi_squared([np.nan, 1.0], [0.5, 0.5])


positive = arrays(np.float64, 8, elements=st.floats(1e-6, 1.0))


@settings(max_examples=100, deadline=None)
@given(positive, positive)
def test_chi_squared_properties(a, b):
    a, b = a / a.sum(), b / b.sum()
    x = chi_squared(a, b)
    assert x >= 0
    assert x == pytest.approx(chi_squared(b, a))
    assert chi_squared(a, a) == 0
    if not np.allclose(a, b, rtol=0, atol=1e-12):
        assert x > 0


def test_total_variation():
    assert total_variation([1, 0], [0, 1]) == 1.0
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0


def test_pipeline_bv_verified():
    res = run_pipeline(bv(8), 5, verify=True)
    r = res.report
    assert r.chi2 < 1e-8 and r.max_abs_error < 1e-8
    assert r.term_count + r.terms_skipped == 4**r.K
    assert r.multiplications <= r.L
    assert compare_report(r)["verdict"] == "pass"
    assert all(v >= 0 for v in r.wall_times.values())


def test_pipeline_no_cut_needed():
    res = run_pipeline(bv(6), 6)
    assert res.report.no_cut_needed and res.report.K == 0 and res.report.L == 0
    assert res.report.chi2 == 0


def test_pipeline_dd_bfs():
    c = generate_benchmark(BenchmarkSpec("SupremacyGrid", dims=(2, 4)))
    res = run_pipeline(c, 6, dd=DDConfig(max_active=2, max_recursions=3, strategy="bfs"))
    dd = res.report.dd
    assert dd["recursions"] == 3
    assert dd["conservation_error"] < 1e-8 and dd["oracle_error"] < 1e-8
    assert dd["max_partial"] <= 4
    assert compare_report(res.report)["verdict"] == "pass"


def test_pipeline_infeasible():
    c = generate_benchmark(BenchmarkSpec("SupremacyGrid", dims=(3, 4)))
    with pytest.raises(Infeasible):
        run_pipeline(c, 4)


def test_pipeline_shots_reports_negatives_and_clips():
    res = run_pipeline(bv(8), 5, mode="shots", shots=256, seed=1, clip=True)
    assert res.report.negative_entries >= 0
    assert res.probabilities.min() >= 0 and res.probabilities.sum() == pytest.approx(1.0)


def test_pipeline_deterministic():
    a = run_pipeline(bv(8), 4, mode="shots", shots=500, seed=3).probabilities
    b = run_pipeline(bv(8), 4, mode="shots", shots=500, seed=3).probabilities
    assert np.array_equal(a, b)


def test_verification_failure(monkeypatch):
    import qcut.harness as h

    real = h.reconstruct_fd

    def corrupt(*args, **kwargs):
        res = real(*args, **kwargs)
        res.probabilities[0] += 1e-3
        return res

    monkeypatch.setattr(h, "reconstruct_fd", corrupt)
    with pytest.raises(VerificationError):
        run_pipeline(generate_benchmark(BenchmarkSpec("HWEA", 8)), 5, verify=True)


def test_compare_report_verdicts():
    base = dict(benchmark="x", n_qubits=8, D=5, n_C=2, K=1, L=1024, term_count=3, terms_skipped=1)
    ok = RunReport(**base, chi2=1e-16, max_abs_error=1e-16)
    assert compare_report(ok)["verdict"] == "pass"
    bad = RunReport(**base, chi2=1e-3, max_abs_error=1e-3)
    verdict = compare_report(bad)
    assert verdict["verdict"] == "fail"
    assert {c["name"] for c in verdict["criteria"] if c["status"] == "fail"} == {"fd-max-error", "fd-chi2"}
    assert compare_report(RunReport(**base))["verdict"] == "unverified"
    noisy = RunReport(**base, mode="shots", shots=256, chi2=50.0)
    v = compare_report(noisy)
    assert v["verdict"] == "fail" and v["criteria"][0]["name"] == "shots-chi2"
    assert json.dumps(v)


def test_shots_threshold_calibration():
    # the threshold must clear honest shot noise on a cut BV run
    chis = [run_pipeline(bv(8), 5, mode="shots", shots=1024, seed=s).report for s in range(5)]
    for r in chis:
        assert r.chi2 <= shots_chi2_threshold(8, r.K, 1024)


def test_write_outputs(tmp_path):
    res = run_pipeline(bv(6), 4)
    write_outputs(res, tmp_path / "json")
    write_outputs(res, tmp_path / "bin", fmt="bin")
    p = json.loads((tmp_path / "json" / "probabilities.json").read_text())
    assert np.allclose(p, res.probabilities)
    assert np.array_equal(read_binary(tmp_path / "bin" / "probabilities.bin"), res.probabilities)
    report = json.loads((tmp_path / "json" / "report.json").read_text())
    assert report["K"] == res.report.K
    assert (tmp_path / "json" / "variants" / "manifest.json").exists()
