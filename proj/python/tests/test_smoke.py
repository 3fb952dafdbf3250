import json
import math

import pytest

import cachegeo as cg


def baseline():
    p = cg.NetworkParams()
    p.helper_density = 0.05
    p.noise_power = 0.01
    return p


def test_noise_optimizer_and_simulation_agree():
    lib = cg.make_library(cg.zipf_popularity(10, 1.0), cg.uniform_rates(1.0, 10, 7))
    report = cg.optimize_noise(lib, baseline(), 3)
    assert abs(sum(report.policy.probs) - 3) < 1e-9
    assert report.kkt_residual < 1e-6
    assert report.objective == pytest.approx(cg.success_noise(lib, baseline(), report.policy))

    opts = cg.SimulationOptions()
    opts.trials = 4000
    opts.seed = 3
    est = cg.simulate_noise_limited(lib, baseline(), report.policy, opts)
    assert abs(est.value - report.objective) <= 4 * est.std_error


def test_two_content_closed_form():
    # kappa T = 2 with rho = 1: p1 = 1/2 + ln(3) / 4.
    p = baseline()
    delta = 2.0 / p.pathloss_exp
    T = (p.tx_power / p.noise_power) ** delta
    p.helper_density = 2.0 / (math.pi * math.gamma(1.0 + delta) * T)
    report = cg.optimize_noise(cg.make_library([0.75, 0.25], [1.0, 1.0]), p, 1)
    assert report.policy.probs[0] == pytest.approx(0.5 + math.log(3.0) / 4.0, abs=1e-8)


def test_interference_bounds():
    lib = cg.make_library([1.0], [1.0])
    consts = cg.interference_constants(lib, 4.0, 1.0)
    policy = cg.CachingPolicy([1.0], 1)
    rayleigh = cg.rayleigh_lower_bound(lib, consts, policy)
    assert rayleigh == pytest.approx(1.0 / (1.0 + math.pi / 4.0), rel=1e-12)
    p = cg.NetworkParams()
    p.helper_density = 1e-5
    p.pathloss_exp = 4.0
    p.noise_power = 0.0
    assert cg.nakagami_lower_bound(lib, p, policy, 1.0) == pytest.approx(rayleigh, rel=1e-3)


def test_placement_sampler():
    policy = cg.CachingPolicy([0.8, 0.7, 0.5], 2)
    caches = cg.build_and_sample(policy, [0.1, 0.6, 0.9])
    assert caches == [[0, 1], [0, 2], [1, 2]]


def test_experiment_harness(tmp_path):
    header, rows = cg.evaluate("optimize-noise", "[library]\ncount = 5\n[policy]\nmemory = 2\n[run]\ntrials = 200\n")
    assert "proposed" in header and len(rows) == 1
    out = tmp_path / "run.csv"
    csv_path, manifest_path, n = cg.run("optimize-noise", "", {"run.output": str(out), "run.trials": "200"})
    assert n == 1
    manifest = json.loads(open(manifest_path).read())
    assert manifest["scenario"] == "optimize-noise"
    assert open(csv_path).readline().rstrip().endswith("manifest")
    header, rows = cg.list_figures()
    assert len(rows) == 9


def test_errors_map_to_python_exceptions():
    with pytest.raises(cg.ConfigError):
        cg.evaluate("simulate", "[network]\ncolour = blue\n")
    with pytest.raises(ValueError):
        cg.optimize_noise(cg.make_library([0.5, 0.5], [1.0, 1.0]), baseline(), 2)
