import numpy as np
import pytest

from sphere_sparse import mapio, so3, sphere, wavelets
from sphere_sparse.sampling import (
    HarmonicCoeffs,
    RotationMap,
    SphericalMap,
    WignerCoeffs,
)


def test_sphere_map_round_trip(tmp_path, rng):
    m = sphere.sht_inverse(sphere.random_coeffs(8, rng))
    path = tmp_path / "m.ssmap"
    mapio.write_ssmap(path, m)
    back = mapio.read_ssmap(path)
    assert isinstance(back, SphericalMap)
    assert back.L == 8 and not back.real
    assert np.abs(back.values - m.values).max() == 0.0


def test_real_flag_round_trip(tmp_path, rng):
    m = sphere.sht_inverse(sphere.random_coeffs(8, rng, real=True))
    m = SphericalMap(8, m.values.real, real=True)
    path = tmp_path / "m.ssmap"
    mapio.write_ssmap(path, m)
    back = mapio.read_ssmap(path)
    assert back.real
    assert np.abs(back.values - m.values).max() == 0.0
    # byte-identical re-emission
    mapio.write_ssmap(tmp_path / "m2.ssmap", back)
    assert (tmp_path / "m.ssmap").read_bytes() == (tmp_path / "m2.ssmap").read_bytes()


def test_harmonic_coeffs_round_trip(tmp_path, rng):
    c = sphere.random_coeffs(12, rng)
    mapio.write_ssmap(tmp_path / "c.ssmap", c)
    back = mapio.read_ssmap(tmp_path / "c.ssmap")
    assert isinstance(back, HarmonicCoeffs)
    assert np.abs(back.values - c.values).max() == 0.0


def test_rotation_kinds_round_trip(tmp_path, rng):
    X = so3.random_wigner_coeffs(6, 3, rng)
    mapio.write_ssmap(tmp_path / "w.ssmap", X)
    back = mapio.read_ssmap(tmp_path / "w.ssmap")
    assert isinstance(back, WignerCoeffs)
    assert (back.L, back.N) == (6, 3)
    assert np.abs(back.values - X.values).max() == 0.0

    f = so3.wigner_inverse(X)
    mapio.write_ssmap(tmp_path / "f.ssmap", f)
    back = mapio.read_ssmap(tmp_path / "f.ssmap")
    assert isinstance(back, RotationMap)
    assert np.abs(back.values - f.values).max() == 0.0


def test_wavelet_container_round_trip(tmp_path, rng):
    cfg = wavelets.WaveletConfig(L=16, N=2, J_min=1)
    K = wavelets.make_kernels(cfg)
    x = sphere.sht_inverse(sphere.random_coeffs(16, rng))
    alpha = wavelets.wavelet_forward(x, K)
    mapio.write_wavelet_coeffs(tmp_path / "a.sswlt", alpha)
    back = mapio.read_wavelet_coeffs(tmp_path / "a.sswlt")
    assert back.config == cfg
    assert np.abs(back.vector() - alpha.vector()).max() == 0.0


def test_bad_magic_rejected(tmp_path):
    (tmp_path / "bad.ssmap").write_bytes(b"NOTMAGIC" + b"\x00" * 40)
    with pytest.raises(ValueError):
        mapio.read_ssmap(tmp_path / "bad.ssmap")


def test_truncated_payload_rejected(tmp_path, rng):
    m = sphere.sht_inverse(sphere.random_coeffs(8, rng))
    mapio.write_ssmap(tmp_path / "m.ssmap", m)
    raw = (tmp_path / "m.ssmap").read_bytes()
    (tmp_path / "short.ssmap").write_bytes(raw[:-16])
    with pytest.raises(ValueError):
        mapio.read_ssmap(tmp_path / "short.ssmap")


def test_trailing_bytes_rejected(tmp_path, rng):
    m = sphere.sht_inverse(sphere.random_coeffs(8, rng))
    mapio.write_ssmap(tmp_path / "m.ssmap", m)
    raw = (tmp_path / "m.ssmap").read_bytes()
    (tmp_path / "long.ssmap").write_bytes(raw + b"\x00" * 8)
    with pytest.raises(ValueError):
        mapio.read_ssmap(tmp_path / "long.ssmap")
