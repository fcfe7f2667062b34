import math

import numpy as np
import pytest

from sphere_sparse import harness, mapio, sphere
from sphere_sparse.harness import (
    ExperimentSpec,
    add_noise,
    best_smoothing_snr,
    compute_snr,
    gaussian_smooth,
    make_testmap,
    run_experiment,
)
from sphere_sparse.operators import BeamSpec, op_beam
from sphere_sparse.sampling import HarmonicCoeffs, SphericalMap


def test_noise_sigma_formula(rng):
    flm = sphere.random_coeffs(8, rng)
    flm = HarmonicCoeffs(8, flm.values / flm.norm())  # unit harmonic norm
    y = np.zeros(10)
    out = add_noise(y, 46.0, flm, seed=0)
    # sigma = 10^(-46/20) ~= 5.0119e-3
    assert abs(harness.noise_sigma(flm, 46.0) - 10 ** (-2.3)) < 1e-15
    assert out.std() < 5 * 10 ** (-2.3)


def test_noise_empirical_std(rng):
    flm = sphere.random_coeffs(4, rng)
    sigma = harness.noise_sigma(flm, 20.0)
    out = add_noise(np.zeros(10**6), 20.0, flm, seed=1)
    assert abs(out.std() - sigma) / sigma < 0.01


def test_infinite_snr_leaves_data_unchanged(rng):
    flm = sphere.random_coeffs(4, rng)
    y = rng.standard_normal(20)
    assert np.array_equal(add_noise(y, math.inf, flm, 0), y)
    assert np.array_equal(add_noise(y, None, flm, 0), y)


def test_compute_snr_cases(rng):
    true = HarmonicCoeffs(4, np.zeros(16, complex))
    v = true.values.copy()
    v[0] = 1.0
    true = HarmonicCoeffs(4, v)
    est = HarmonicCoeffs(4, v * 0.9)  # error norm 0.1, signal norm 1
    assert abs(compute_snr(est, true) - 20.0) < 1e-12
    zero = HarmonicCoeffs(4, np.zeros(16, complex))
    assert abs(compute_snr(zero, true) - 0.0) < 1e-12
    assert compute_snr(true, true) == math.inf
    a = sphere.random_coeffs(6, rng)
    b = sphere.random_coeffs(6, rng)
    direct = 20 * np.log10(np.linalg.norm(a.values) / np.linalg.norm(b.values - a.values))
    assert abs(compute_snr(b, a) - direct) < 1e-12


def test_testmap_band_limited(rng):
    m = make_testmap("band-limited-noise", 32, seed=3)
    # exactly band-limited: analysis then synthesis reproduces the samples
    back = sphere.sht_inverse(sphere.sht_forward(m))
    assert np.abs(back.values - m.values).max() < 1e-10
    m2 = make_testmap("continents", 16, seed=3)
    back2 = sphere.sht_inverse(sphere.sht_forward(m2))
    assert np.abs(back2.values - m2.values).max() < 1e-10


def test_ingest_round_trip_byte_identical(tmp_path, rng):
    m = make_testmap("band-limited-noise", 16, seed=5)
    p = tmp_path / "in.ssmap"
    mapio.write_ssmap(p, m)
    ingested = make_testmap("ingested", 16, path=p)
    p2 = tmp_path / "out.ssmap"
    mapio.write_ssmap(p2, SphericalMap(16, ingested.values, real=True))
    mapio.write_ssmap(tmp_path / "in2.ssmap", SphericalMap(16, m.values, real=True))
    assert (tmp_path / "in2.ssmap").read_bytes() == p2.read_bytes()


def test_ingest_truncation_preserves_leading_coefficients(tmp_path, rng):
    flm = sphere.random_coeffs(128, rng, real=True)
    mapio.write_ssmap(tmp_path / "c.ssmap", flm)
    m32 = make_testmap("ingested", 32, path=tmp_path / "c.ssmap")
    flm32 = sphere.sht_forward(m32)
    assert np.abs(flm32.values - flm.values[: 32 * 32]).max() < 1e-10


def test_ingest_errors(tmp_path):
    with pytest.raises(ValueError):
        make_testmap("ingested", 8)  # no path
    (tmp_path / "junk.ssmap").write_bytes(b"garbage")
    with pytest.raises(ValueError):
        make_testmap("ingested", 8, path=tmp_path / "junk.ssmap")
    with pytest.raises(ValueError):
        make_testmap("nope", 8)


def test_noiseless_denoise_recovers_exactly():
    L = 16
    m = make_testmap("band-limited-noise", L, seed=2)
    spec = ExperimentSpec(
        kind="denoise", L=L, setting="analysis", input_snr_db=None, realisations=1, seed=3,
        max_iter=50,
    )
    rep = run_experiment(spec, m)
    assert rep.entries[0].snrs[0] >= 100.0


def test_reproducibility_and_parallel_equivalence():
    L = 8
    m = make_testmap("continents", L, seed=1)
    spec = ExperimentSpec(
        kind="inpaint", L=L, n_m=(0.5,), realisations=2, seed=9, max_iter=40,
    )
    a = run_experiment(spec, m)
    b = run_experiment(spec, m)
    assert a.entries[0].snrs == b.entries[0].snrs  # bit-for-bit, serial
    c = run_experiment(spec, m, n_jobs=2)
    assert np.abs(np.array(c.entries[0].snrs) - np.array(a.entries[0].snrs)).max() < 1e-10


def test_snr_increases_with_measurements():
    L = 16
    m = make_testmap("continents", L, seed=1)
    spec = ExperimentSpec(
        kind="inpaint", L=L, n_m=(0.3, 1.0, 1.9), realisations=2, seed=4, max_iter=150,
    )
    rep = run_experiment(spec, m)
    means = [e.mean for e in rep.entries]
    assert means[0] < means[1] < means[2]


def test_deconvolution_beats_raw_smoothed_data():
    L = 16
    m = make_testmap("continents", L, seed=2)
    flm_true = sphere.sht_forward(m)
    spec = ExperimentSpec(kind="deconvolve", L=L, realisations=1, seed=6, max_iter=200)
    rep = run_experiment(spec, m)
    beam = op_beam(BeamSpec(L))
    data_snr = compute_snr(
        sphere.sht_forward(SphericalMap(L, beam.apply(m.vector()).reshape(L, 2 * L - 1))),
        flm_true,
    )
    assert rep.entries[0].snrs[0] > data_snr


def test_emitted_artifacts(tmp_path):
    L = 8
    m = make_testmap("continents", L, seed=1)
    spec = ExperimentSpec(kind="inpaint", L=L, n_m=(0.5, 1.0), realisations=1, seed=2,
                          max_iter=30)
    run_experiment(spec, m, emit_dir=tmp_path / "out")
    names = {p.name for p in (tmp_path / "out").iterdir()}
    assert "truth.ssmap" in names
    assert "snr_table.txt" in names
    assert "sweep.tsv" in names
    assert "snr_curve.png" in names
    assert any(n.startswith("recon_nm") and n.endswith(".ssmap") for n in names)
    table = (tmp_path / "out" / "snr_table.txt").read_text()
    assert table.startswith("n_m\t")
    assert len(table.strip().splitlines()) == 3  # header + 2 rows


def test_gaussian_smoothing_helpers(rng):
    L = 16
    m = make_testmap("continents", L, seed=7)
    flm = sphere.sht_forward(m)
    sm = gaussian_smooth(m, 0.2)
    # smoothing suppresses high degrees
    top = sphere.sht_forward(sm).to_matrix()[L - 1]
    orig = flm.to_matrix()[L - 1]
    assert np.abs(top).max() < np.abs(orig).max()
    noisy_vals = add_noise(m.vector(), 15.0, flm, seed=3).reshape(L, 2 * L - 1)
    best, sig = best_smoothing_snr(SphericalMap(L, noisy_vals), flm)
    assert best > compute_snr(sphere.sht_forward(SphericalMap(L, noisy_vals)), flm)
    assert sig > 0
