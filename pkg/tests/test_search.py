import json
import math

import numpy as np
import pytest

from cpmeans import (
    TX_THRESHOLD,
    MeanFunction,
    ParameterError,
    SearchSpec,
    find_negative_T,
    inverse_mean_matrix,
    mean_matrix,
    scan_mean_matrix_positivity,
    scan_positivity,
    scan_two_sided,
    verify_example6_g,
    verify_lemma2_pointwise,
    witness_criterion,
)
from cpmeans.search import example6_g
from oracles import G_HALF_AT_1, min_eig_lapack


def test_ando_mix_witness():
    w = find_negative_T(SearchSpec("ando_mix", n=3, lam_range=(0.01, 100.0), budget=100_000))
    assert w is not None and w.revalidate()
    assert w.lam.max() == 1.0 and len(w.lam) == 3
    assert min_eig_lapack(inverse_mean_matrix("ando_mix", w.lam)) == pytest.approx(w.criterion_value, rel=1e-10)
    T = inverse_mean_matrix("ando_mix", w.lam)
    v = np.real(w.vector)
    assert v @ T @ v < 0


def test_arithmetic_has_no_witness():
    assert find_negative_T(SearchSpec("arithmetic", budget=20_000)) is None
    assert find_negative_T(SearchSpec("geometric", budget=20_000)) is None


def test_tx_interp_witness_inside_operator_monotone_range():
    fn = MeanFunction("tx_interp", 0.25)
    assert fn.operator_monotone_claimed and 0.25 > TX_THRESHOLD
    w = find_negative_T(SearchSpec(fn, budget=100_000))
    assert w is not None and w.revalidate()


def test_tx_interp_near_one_yields_nothing():
    # close to the arithmetic end the inverse mean matrix stays PSD
    assert find_negative_T(SearchSpec("tx_interp:0.9", budget=50_000)) is None


def test_determinant_criterion():
    w = find_negative_T(SearchSpec("ando_mix", budget=20_000, criterion="determinant"))
    assert w is not None and w.criterion_value < 0
    assert w.criterion_value == pytest.approx(np.linalg.det(inverse_mean_matrix("ando_mix", w.lam)), rel=1e-12)


@pytest.mark.parametrize("strategy", ["grid", "random", "hybrid"])
def test_search_deterministic(strategy):
    spec = dict(fn="ando_mix", budget=5_000, seed=3, strategy=strategy)
    a, b = find_negative_T(SearchSpec(**spec)), find_negative_T(SearchSpec(**spec))
    assert a is not None and np.array_equal(a.lam, b.lam) and a.criterion_value == b.criterion_value
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_search_spec_validation():
    for bad in (dict(n=1), dict(budget=0), dict(strategy="anneal"), dict(criterion="trace"), dict(lam_range=(1.0, 0.5))):
        with pytest.raises(ParameterError):
            SearchSpec("ando_mix", **bad)


def test_witness_criterion_scale_free():
    lam = np.array([0.04, 0.13, 1.0])
    assert witness_criterion("ando_mix", 3 * lam) == pytest.approx(witness_criterion("ando_mix", lam) / 3, rel=1e-10)


def test_binomial_negative_p_two_by_two():
    # for p < 0, f_p < sqrt, so m(1, x) < sqrt(x) and det T < 0 for any x != 1
    for p in (-1.0, -0.5, -0.1):
        T = inverse_mean_matrix(MeanFunction("binomial", p), [1.0, 4.0])
        assert np.linalg.det(T) < 0
    assert np.linalg.det(inverse_mean_matrix("binomial:0.5", [1.0, 4.0])) > 0


@pytest.mark.parametrize(
    "family, grid",
    [
        ("hansen", np.linspace(0.0, 0.5, 6)),
        ("power_difference", np.linspace(0.5, 2.0, 6)),
        ("stolarsky", np.linspace(-1.0, 2.0, 6)),
        ("binomial", np.linspace(0.0, 1.0, 6)),
        ("wyd_efek", np.linspace(0.1, 0.9, 5)),
    ],
)
def test_positivity_scan_small(family, grid):
    rep = scan_positivity(family, grid, n=5, spectra_per_point=15, seed=1)
    assert rep.violations == []
    assert len(rep.rows) == len(grid)


def test_scan_records_findings_outside_claims():
    rep = scan_positivity("hansen", [0.75, 0.9], n=4, spectra_per_point=10)
    assert rep.violations == []
    assert all(not r["claimed"] for r in rep.rows)
    rep = scan_positivity("binomial", [-0.5], n=4, spectra_per_point=10)
    assert len(rep.violations) == 1


def test_mean_matrix_scan():
    rep = scan_mean_matrix_positivity("hansen", [0.75], n=5, spectra_per_point=50)
    assert rep.violations == [] and rep.rows[0]["psd"]
    assert min_eig_lapack(mean_matrix("arithmetic", [1.0, 3.0])) < 0


def test_scan_csv_json_deterministic():
    a = scan_positivity("stolarsky", [-1.0, 0.0, 1.0], n=4, spectra_per_point=5, seed=2)
    b = scan_positivity("stolarsky", [-1.0, 0.0, 1.0], n=4, spectra_per_point=5, seed=2)
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()
    header = a.to_csv().splitlines()[0].split(",")
    assert header == list(a.COLUMNS)
    assert json.loads(a.to_json())["rows"][0]["fn"] == "stolarsky:-1"


def test_scan_parallel_matches_serial():
    serial = scan_positivity("heinz", [0.1, 0.4], n=4, spectra_per_point=5)
    parallel = scan_positivity("heinz", [0.1, 0.4], n=4, spectra_per_point=5, jobs=2)
    assert serial.to_csv() == parallel.to_csv()


def test_two_sided():
    rows = {r["fn"]: r for r in scan_two_sided(["geometric", "arithmetic", "harmonic"], n=3, spectra=10)}
    assert rows["geometric"]["beta_cp"] and rows["geometric"]["J_cp"]
    assert rows["arithmetic"]["beta_cp"] and not rows["arithmetic"]["J_cp"]
    assert not rows["harmonic"]["beta_cp"] and rows["harmonic"]["J_cp"]


def test_wyd_pointwise_bound():
    assert MeanFunction("wyd_efek", 0.5)(4.0) == 2.25
    out = verify_lemma2_pointwise(np.linspace(0.05, 0.95, 19), np.logspace(-3, 3, 241))
    assert out["final_violations"] == 0 and out["intermediate_violations"] == 0
    assert out["final_min_slack"] >= -1e-12


def test_double_exp_g():
    assert example6_g(1.3, 0.0) == 0.0
    out = verify_example6_g([1.0], [0.5])
    g, closed = out["g_half"][0]
    assert g == pytest.approx(closed, rel=1e-12)
    assert g == pytest.approx(G_HALF_AT_1, rel=1e-12) and g > 0
    out = verify_example6_g([2.0], np.linspace(-2.0, 3.0, 101))
    assert out["violations"] == 0 and out["endpoint_max"] <= 1e-12
    g_half = math.sinh(1.0) / 4 - math.sinh(0.5) ** 2
    assert example6_g(1.0, 0.5) == pytest.approx(g_half, rel=1e-12)


def test_tx_interp_threshold_is_ando_mix():
    x = np.logspace(-4, 4, 101)
    np.testing.assert_allclose(MeanFunction("tx_interp", TX_THRESHOLD)(x), MeanFunction("ando_mix")(x), rtol=1e-14)


def test_witness_is_sorted():
    w = find_negative_T(SearchSpec("tx_interp:0.3", budget=20_000))
    assert w is not None and np.all(np.diff(w.lam) > 0) and w.lam[-1] == 1.0
