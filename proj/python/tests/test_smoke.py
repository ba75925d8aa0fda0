import math

import pytest

import rscov


def test_special_functions():
    assert rscov.normal_cdf(0.0) == pytest.approx(0.5)
    assert rscov.normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
    assert rscov.chisq_pdf(0.0, 2) == pytest.approx(0.5)
    assert rscov.chisq_cdf(2.0, 2) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
    assert rscov.min_order_stat_pdf(2.0, 2, 3) == pytest.approx(1.5 * math.exp(-3.0), abs=1e-12)


def test_gsc_gap_is_exact():
    beta = rscov.make_gsc(5, 3, 1.0, [1.0, 1.0, 1.0, 1.0])
    assert beta.shape == (5, 4)
    x = [1.0, 0.25, 0.5, 0.75]
    best = sum(b * v for b, v in zip(beta[0], x))
    for i in range(1, 5):
        other = sum(b * v for b, v in zip(beta[i], x))
        assert best - other == pytest.approx(1.0, abs=1e-12)


def test_benchmark_info():
    info = rscov.benchmark_info(0)
    assert info["k"] == 5
    assert info["d"] == 3
    assert info["m"] == 8
    assert not info["heteroscedastic"]
    assert rscov.benchmark_info(6)["heteroscedastic"]


def test_solve_h_minimum_form_matches_published_value():
    sol = rscov.solve_h(problem=0, procedure="fdhom", form="minimum")
    assert sol["h"] == pytest.approx(5.927, abs=0.01)
    assert sol["dof"] == 396
    assert list(sol["x0"]) == [1.0, 1.0, 1.0, 1.0]


def test_solve_h_d1_expectation_matches_published_value():
    sol = rscov.solve_h(problem=7, procedure="fdhom", form="expectation")
    assert sol["h"] == pytest.approx(4.612, abs=0.01)


def test_pcs_bound_monotone_in_h():
    lo = rscov.pcs_bound(2.0, 1.0)
    hi = rscov.pcs_bound(4.0, 1.0)
    assert 0.0 < lo < hi < 1.0


def test_run_experiment_is_deterministic():
    kwargs = dict(problem=1, procedure="fdhom", form="expectation", h=2.363,
                  replications=3, test_covariates=200, seed=12)
    a = rscov.run_experiment(**kwargs)
    b = rscov.run_experiment(**kwargs)
    assert a["pcs_e_hat"] == b["pcs_e_hat"]
    assert a["mean_total_samples"] == b["mean_total_samples"]
    assert 0.0 <= a["pcs_e_hat"] <= 1.0
    assert a["mean_total_samples"] >= 2 * 8 * 50


def test_expected_qalys_is_finite_and_ordered():
    # high risk, perfect aspirin response: chemoprevention should win
    x = [1.0, 60.0, 0.1, 1.0, 0.0]
    q_surv = rscov.expected_qalys(1, x)
    q_aspirin = rscov.expected_qalys(2, x)
    assert math.isfinite(q_surv) and math.isfinite(q_aspirin)
    assert q_aspirin > q_surv
