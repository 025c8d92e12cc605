"""End-to-end acceptance suite.

Each test covers one numbered release criterion and prints a single
PASS/FAIL line so the whole gate can be read off the test log at a
glance. Tolerances are part of the contract and must not be loosened.
"""

import random
import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

from science_index import canonical, clients
from science_index.bibliometrics import compute_h_index
from science_index.errors import BrokenChain
from science_index.evaluation import (PopulationSpec, generate_population,
                                      run_north_south_experiment,
                                      run_share_shift_experiment)
from science_index.ledger import (KIND_FULFILL, replay, save_log, load_log,
                                  verify_chain)
from science_index.regression import (FeatureVector, ModelConfig,
                                      SufficientStats, design_row, fit_batch,
                                      reference_preset, predict, update_online)
from science_index.scaling import scale_beta
from science_index.scoring import calibrate_share_weight, compute_phi

from conftest import make_noiseless_features, make_noisy_features
from test_ledger import run_workload


@contextmanager
def criterion(number, label):
    try:
        yield
    except BaseException:
        print(f"\n[acceptance] criterion {number:2d} FAIL  {label}")
        raise
    print(f"\n[acceptance] criterion {number:2d} PASS  {label}")


def test_01_formula_fidelity():
    with criterion(1, "shipped-coefficient predictions and outlier scaling"):
        model = reference_preset()
        beta = predict(model, FeatureVector(20.0, 50.0, 1000.0, actual_h=0.0))
        assert beta == pytest.approx(11.57323, abs=1e-9)
        origin = predict(model, FeatureVector(0.0, 0.0, 0.0, actual_h=0.0))
        assert origin == 1.71933
        assert scale_beta(100.0) == pytest.approx(78.6782, abs=1e-4)


def test_02_scaling_function_analysis():
    with criterion(2, "scaling fixed point, compression range, jump at 60"):
        fixed = 61.285714
        assert scale_beta(fixed) == pytest.approx(fixed, abs=1e-6)
        for beta in range(62, 501):
            assert scale_beta(float(beta)) < beta
        just_above = np.nextafter(60.0, np.inf)
        jump = scale_beta(just_above) - scale_beta(60.0)
        assert jump == pytest.approx(0.545, abs=2e-3)


def test_03_logistic_contract():
    with criterion(3, "logistic midpoint, symmetry, open range"):
        assert compute_phi(0.0) == 5.0
        rng = np.random.default_rng(0)
        for eps in rng.uniform(-50, 50, 10_000):
            assert compute_phi(eps) + compute_phi(-eps) == \
                pytest.approx(10.0, abs=1e-12)
        for eps in (-700.0, -100.0, -1.0, 1.0, 100.0, 700.0):
            assert 0.0 < compute_phi(eps) < 10.0


def test_04_online_batch_equivalence():
    with criterion(4, "1000-point stream matches batch fit"):
        start = time.perf_counter()
        data = make_noisy_features(n=1000, seed=19)
        batch = fit_batch(ModelConfig(), data)
        online = fit_batch(ModelConfig(), data[:10])
        for point in data[10:]:
            online = update_online(online, point)
        np.testing.assert_allclose(online.weights, batch.weights, rtol=1e-8)

        config = ModelConfig()
        forward = SufficientStats.empty(config.dimension)
        backward = SufficientStats.empty(config.dimension)
        for point in data:
            forward = forward.add(design_row(config, point), point.actual_h)
        for point in reversed(data):
            backward = backward.add(design_row(config, point), point.actual_h)
        for a, b in zip(forward.effective(), backward.effective()):
            np.testing.assert_allclose(a, b, rtol=1e-12)
        assert time.perf_counter() - start < 1.0


def test_05_weight_recovery():
    with criterion(5, "noiseless fit recovers all four coefficients to 1e-6"):
        start = time.perf_counter()
        state = fit_batch(ModelConfig(), make_noiseless_features(n=500, seed=29))
        np.testing.assert_allclose(
            state.weights, (1.71933, 0.06902, 0.10867, 0.00304), atol=1e-6)
        assert time.perf_counter() - start < 1.0


def test_06_share_shift_reproduction():
    with criterion(6, "calibrated mean share-shift 0.27 at n=3000"):
        start = time.perf_counter()
        population = generate_population(
            PopulationSpec(size=3000, seed=37, share_mean=6.6))
        model = fit_batch(ModelConfig(),
                          [FeatureVector.from_career_stats(s)
                           for s in population])
        weight = calibrate_share_weight(model, population, 0.27)
        mean_shift, shifts = run_share_shift_experiment(population, model,
                                                        weight)
        assert mean_shift == pytest.approx(0.27, abs=0.02)
        assert all(s >= 0.0 for s in shifts)
        assert time.perf_counter() - start < 5.0


def test_07_north_south_convergence():
    with criterion(7, "h gap >= 2 collapses to phi gap < 0.25"):
        start = time.perf_counter()
        north = PopulationSpec(size=1000, seed=101)
        south = PopulationSpec(size=1000, seed=202, resource_scale=0.55)
        report = run_north_south_experiment(north, south)
        assert report.h_gap >= 2.0
        assert report.phi_gap < 0.25
        assert report.gap_ratio < 0.15
        assert time.perf_counter() - start < 5.0


def test_08_ledger_determinism(fitted_model, tmp_path):
    with criterion(8, "500-tx replay determinism, corruption detection, "
                      "update-before-score"):
        start = time.perf_counter()
        first = run_workload(fitted_model, 500, seed=97)
        second = run_workload(fitted_model, 500, seed=97)
        assert first.head_digest == second.head_digest
        replayed = replay(first.entries)
        assert replayed.head_digest == first.head_digest

        # single corrupted byte is pinned to its seq
        target_seq = 123
        corrupted = list(first.entries)
        entry = corrupted[target_seq]
        broken = bytearray(entry.payload)
        broken[5] ^= 0x01
        corrupted[target_seq] = replace(entry, payload=bytes(broken))
        with pytest.raises(BrokenChain) as excinfo:
            verify_chain(corrupted)
        assert excinfo.value.seq == target_seq

        # the log alone proves every fulfillment updated before scoring
        path = tmp_path / "acceptance.log"
        save_log(path, first.entries)
        version = replay(load_log(path)).genesis_version
        for entry in load_log(path):
            if entry.kind != KIND_FULFILL:
                continue
            version += 1
            payload = canonical.loads(entry.payload)
            assert payload["score"]["model_version"] == version
        assert version > replayed.genesis_version
        assert time.perf_counter() - start < 5.0


def test_09_h_index_oracle():
    with criterion(9, "10,000 random citation lists match the definition"):
        start = time.perf_counter()
        rnd = random.Random(53)
        for _ in range(10_000):
            citations = [rnd.randint(0, 200)
                         for _ in range(rnd.randint(0, 50))]
            h = compute_h_index(citations)
            brute = max((k for k in range(len(citations) + 1)
                         if sum(1 for c in citations if c >= k) >= k),
                        default=0)
            assert h == brute
        assert time.perf_counter() - start < 1.0


def test_10_offline_guarantee():
    with criterion(10, "no network requests anywhere in the suite"):
        assert clients.network_request_count() == 0
