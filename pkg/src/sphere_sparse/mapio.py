"""Binary container for maps and coefficient sets.

Record layout (little endian): the magic ``SSMAP1``, then u32 fields
band-limit L, kind, real flag, and (for rotation-group kinds) the
directional band-limit N, followed by a float64 payload.  Complex payloads
interleave real and imaginary parts; real-flagged payloads store the real
parts only.  Kinds: 0 sphere samples, 1 harmonic coefficients, 2 rotation
group samples, 3 Wigner coefficients.

Wavelet coefficient sets serialise as a ``SSWLT1`` container: a JSON
manifest (scale layout) followed by the scaling-map record and one
rotation-map record per scale.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .sampling import (
    HarmonicCoeffs,
    RotationMap,
    SphericalMap,
    WignerCoeffs,
    flm_size,
    n_so3_samples,
    n_sphere_samples,
    n_wigner_coeffs,
)
from .wavelets import WaveletCoeffs, WaveletConfig

__all__ = ["write_ssmap", "read_ssmap", "write_wavelet_coeffs", "read_wavelet_coeffs"]

_MAGIC = b"SSMAP1"
_WAVELET_MAGIC = b"SSWLT1"

KIND_SPHERE_SAMPLES = 0
KIND_HARMONIC_COEFFS = 1
KIND_ROTATION_SAMPLES = 2
KIND_WIGNER_COEFFS = 3


def _payload_bytes(vec: np.ndarray, real: bool) -> bytes:
    if real:
        return np.ascontiguousarray(vec.real, dtype="<f8").tobytes()
    inter = np.empty(2 * vec.size)
    inter[0::2] = vec.real
    inter[1::2] = vec.imag
    return np.ascontiguousarray(inter, dtype="<f8").tobytes()


def _decode_payload(buf: bytes, n: int, real: bool) -> np.ndarray:
    expected = n * 8 * (1 if real else 2)
    if len(buf) != expected:
        raise ValueError(f"payload holds {len(buf)} bytes, expected {expected}")
    raw = np.frombuffer(buf, dtype="<f8")
    if real:
        return raw.astype(complex)
    return raw[0::2] + 1j * raw[1::2]


def _encode(obj) -> bytes:
    if isinstance(obj, SphericalMap):
        kind, real, vec, extra = KIND_SPHERE_SAMPLES, obj.real, obj.vector(), b""
        L = obj.L
    elif isinstance(obj, HarmonicCoeffs):
        kind, real, vec, extra = KIND_HARMONIC_COEFFS, obj.real, obj.values, b""
        L = obj.L
    elif isinstance(obj, RotationMap):
        kind, real, vec = KIND_ROTATION_SAMPLES, False, obj.vector()
        extra = struct.pack("<I", obj.N)
        L = obj.L
    elif isinstance(obj, WignerCoeffs):
        kind, real, vec = KIND_WIGNER_COEFFS, False, obj.values
        extra = struct.pack("<I", obj.N)
        L = obj.L
    else:
        raise TypeError(f"cannot serialise object of type {type(obj).__name__}")
    header = _MAGIC + struct.pack("<III", L, kind, 1 if real else 0) + extra
    return header + _payload_bytes(vec, real)


def write_ssmap(path: str | Path, obj) -> None:
    Path(path).write_bytes(_encode(obj))


def _decode(buf: bytes, offset: int = 0):
    """Returns (object, bytes consumed)."""
    if buf[offset : offset + 6] != _MAGIC:
        raise ValueError("not an SSMAP1 record (bad magic)")
    L, kind, real_flag = struct.unpack_from("<III", buf, offset + 6)
    pos = offset + 6 + 12
    real = bool(real_flag)
    if kind in (KIND_ROTATION_SAMPLES, KIND_WIGNER_COEFFS):
        (N,) = struct.unpack_from("<I", buf, pos)
        pos += 4
    if kind == KIND_SPHERE_SAMPLES:
        n = n_sphere_samples(L)
    elif kind == KIND_HARMONIC_COEFFS:
        n = flm_size(L)
    elif kind == KIND_ROTATION_SAMPLES:
        n = n_so3_samples(L, N)
    elif kind == KIND_WIGNER_COEFFS:
        n = n_wigner_coeffs(L, N)
    else:
        raise ValueError(f"unknown record kind {kind}")
    width = n * 8 * (1 if real else 2)
    vec = _decode_payload(buf[pos : pos + width], n, real)
    pos += width
    if kind == KIND_SPHERE_SAMPLES:
        obj = SphericalMap(L, vec, real=real)
    elif kind == KIND_HARMONIC_COEFFS:
        obj = HarmonicCoeffs(L, vec, real=real)
    elif kind == KIND_ROTATION_SAMPLES:
        obj = RotationMap(L, N, vec)
    else:
        obj = WignerCoeffs(L, N, vec)
    return obj, pos - offset


def read_ssmap(path: str | Path):
    buf = Path(path).read_bytes()
    obj, used = _decode(buf)
    if used != len(buf):
        raise ValueError(f"{used} bytes decoded but file holds {len(buf)}")
    return obj


def write_wavelet_coeffs(path: str | Path, coeffs: WaveletCoeffs) -> None:
    cfg = coeffs.config
    manifest = {
        "L": cfg.L,
        "N": cfg.N,
        "lambda": cfg.lam,
        "J_min": cfg.J_min,
        "J_max": cfg.J_max,
        "L_j": [cfg.band_limit(j) for j in cfg.scales],
        "N_j": [cfg.azimuthal_band_limit(j) for j in cfg.scales],
    }
    mbytes = json.dumps(manifest).encode()
    out = _WAVELET_MAGIC + struct.pack("<I", len(mbytes)) + mbytes
    out += _encode(coeffs.scaling)
    for w in coeffs.wavelets:
        out += _encode(w)
    Path(path).write_bytes(out)


def read_wavelet_coeffs(path: str | Path) -> WaveletCoeffs:
    buf = Path(path).read_bytes()
    if buf[:6] != _WAVELET_MAGIC:
        raise ValueError("not an SSWLT1 container (bad magic)")
    (mlen,) = struct.unpack_from("<I", buf, 6)
    manifest = json.loads(buf[10 : 10 + mlen].decode())
    cfg = WaveletConfig(
        L=manifest["L"], N=manifest["N"], lam=manifest["lambda"], J_min=manifest["J_min"]
    )
    if manifest["L_j"] != [cfg.band_limit(j) for j in cfg.scales]:
        raise ValueError("manifest scale band-limits do not match the configuration")
    pos = 10 + mlen
    scaling, used = _decode(buf, pos)
    pos += used
    if not isinstance(scaling, SphericalMap):
        raise ValueError("first record of a wavelet container must be the scaling map")
    wavelets = []
    for _ in cfg.scales:
        w, used = _decode(buf, pos)
        pos += used
        if not isinstance(w, RotationMap):
            raise ValueError("wavelet records must be rotation-group maps")
        wavelets.append(w)
    if pos != len(buf):
        raise ValueError("trailing bytes after the last wavelet record")
    return WaveletCoeffs(cfg, scaling, wavelets)
