import math
import struct

import numpy as np
import pytest

from melgauge.dsp import AudioBuffer, frame_count
from melgauge.exceptions import DegenerateFilterbankError, GridWarning, MspecFormatError
from melgauge.mel import (
    MSPEC_HEADER_SIZE,
    MelConfig,
    MelSpectrogram,
    benchmark_frames,
    compress_db,
    compress_log,
    enumerate_grid,
    hz_to_mel_slaney,
    is_grid_config,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz_slaney,
    read_mspec,
    write_mspec,
)

from conftest import sine


# ------------------------------------------------------------ mel scale

def _mel_of(f: float) -> float:
    # independent scalar evaluation
    if f < 1000.0:
        return f / (200.0 / 3.0)
    return 15.0 + 27.0 * math.log(f / 1000.0) / math.log(6.4)


def test_mel_scale_anchors():
    assert hz_to_mel_slaney(0.0) == 0.0
    assert hz_to_mel_slaney(1000.0) == pytest.approx(15.0, abs=1e-12)
    assert hz_to_mel_slaney(200.0 / 3.0) == pytest.approx(1.0, abs=1e-12)
    assert mel_to_hz_slaney(15.0) == pytest.approx(1000.0, rel=1e-12)


def test_mel_scale_log_region_value():
    expected = 15.0 + 27.0 * math.log(6.0) / math.log(6.4)
    assert hz_to_mel_slaney(6000.0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(41.06128, abs=5e-6)


def test_mel_scale_matches_scalar_formula(rng):
    for f in rng.uniform(0.0, 8000.0, 500):
        assert hz_to_mel_slaney(float(f)) == pytest.approx(_mel_of(float(f)), rel=1e-12)


def test_mel_scale_roundtrip(rng):
    freqs = np.exp(rng.uniform(np.log(1.0), np.log(8000.0), 2000))
    roundtrip = mel_to_hz_slaney(hz_to_mel_slaney(freqs))
    assert np.abs(roundtrip / freqs - 1.0).max() <= 1e-9
    mels = rng.uniform(0.0, 45.0, 2000)
    back = hz_to_mel_slaney(mel_to_hz_slaney(mels))
    assert np.abs(back[mels > 0] / mels[mels > 0] - 1.0).max() <= 1e-9


def test_mel_scale_monotone(rng):
    f = np.sort(rng.uniform(0.0, 8000.0, 1000))
    m = hz_to_mel_slaney(f)
    assert np.all(np.diff(m) > 0.0)


def test_mel_scale_rejects_negative():
    with pytest.raises(ValueError):
        hz_to_mel_slaney(-1.0)
    with pytest.raises(ValueError):
        mel_to_hz_slaney(np.array([1.0, -0.5]))


def test_mel_scale_scalar_array_parity():
    f = [250.0, 1000.0, 3333.0]
    array = hz_to_mel_slaney(np.array(f))
    for i, value in enumerate(f):
        assert array[i] == hz_to_mel_slaney(value)


# ------------------------------------------------------------ filterbank

def _reference_filterbank(sample_rate, n_mels, frame_size, fmin, fmax):
    # loop-coded construction straight from the definition
    def to_hz(m):
        if m < 15.0:
            return m * (200.0 / 3.0)
        return 1000.0 * math.exp(math.log(6.4) / 27.0 * (m - 15.0))

    lo, hi = _mel_of(fmin) if fmin > 0 else 0.0, _mel_of(fmax)
    edges = [to_hz(lo + (hi - lo) * i / (n_mels + 1)) for i in range(n_mels + 2)]
    n_bins = frame_size // 2 + 1
    weights = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        f_left, f_center, f_right = edges[i], edges[i + 1], edges[i + 2]
        norm = 2.0 / (f_right - f_left)
        for b in range(n_bins):
            f = b * sample_rate / frame_size
            if f_left <= f <= f_center:
                tri = (f - f_left) / (f_center - f_left)
            elif f_center < f <= f_right:
                tri = (f_right - f) / (f_right - f_center)
            else:
                tri = 0.0
            weights[i, b] = tri * norm
    return weights


@pytest.mark.parametrize("sample_rate,n_mels", [(12000, 48), (16000, 96)])
def test_filterbank_matches_reference_construction(sample_rate, n_mels):
    config = MelConfig(sample_rate, n_mels)
    fb = mel_filterbank(config)
    expected = _reference_filterbank(sample_rate, n_mels, 512, 0.0, sample_rate / 2.0)
    assert fb.weights.shape == (n_mels, 257)
    assert np.abs(fb.weights - expected).max() <= 1e-12


def test_filterbank_shape_and_support():
    fb = mel_filterbank(MelConfig(12000, 48))
    assert fb.weights.shape == (48, 257)
    assert np.all(fb.weights >= 0.0)
    assert np.all(np.isfinite(fb.weights))
    assert np.all(np.any(fb.weights > 0.0, axis=1))


def test_filterbank_centers_increasing_and_in_range():
    config = MelConfig(16000, 96)
    fb = mel_filterbank(config)
    assert fb.center_freqs.shape == (96,)
    assert np.all(np.diff(fb.center_freqs) > 0.0)
    assert fb.center_freqs[0] > 0.0
    assert fb.center_freqs[-1] < 8000.0


def test_filterbank_first_center_frequency():
    # center of filter 0 sits one mel step above fmin
    config = MelConfig(12000, 48)
    fb = mel_filterbank(config)
    step = _mel_of(6000.0) / 49.0
    assert fb.center_freqs[0] == pytest.approx(step * 200.0 / 3.0, rel=1e-12)


def test_filterbank_degenerate_grid_raises():
    with pytest.warns(GridWarning):
        config = MelConfig(12000, 96, frame_size=32)
    with pytest.raises(DegenerateFilterbankError):
        mel_filterbank(config)


# ------------------------------------------------------------ compressions

def test_db_compression_anchors():
    assert compress_db(1.0) == 0.0
    assert compress_db(10.0) == pytest.approx(10.0, abs=1e-12)
    assert compress_db(0.0) == pytest.approx(-100.0, abs=1e-9)
    assert compress_db(1e-12) == pytest.approx(-100.0, abs=1e-9)  # clamped
    assert compress_db(0.0, floor_eps=1e-6) == pytest.approx(-60.0, abs=1e-9)
    with pytest.raises(ValueError):
        compress_db(1.0, floor_eps=0.0)


def test_log_compression_anchors():
    assert compress_log(0.0) == 0.0
    assert compress_log(1.0) == pytest.approx(math.log(10001.0), rel=1e-15)
    assert compress_log(1e-4) == pytest.approx(math.log(2.0), rel=1e-12)


def test_compressions_preserve_order(rng):
    x = np.sort(rng.uniform(0.0, 10.0, 1000))
    assert np.all(np.diff(compress_log(x)) > 0.0)
    above_floor = x[x > 1e-9]
    assert np.all(np.diff(compress_db(above_floor)) > 0.0)


# ------------------------------------------------------------ spectrogram

def test_mel_spectrogram_benchmark_shape():
    config = MelConfig(12000, 96, 1, "dB", target_frames=1366)
    audio = AudioBuffer(np.zeros(349440), 12000)
    spec = mel_spectrogram(audio, config)
    assert spec.values.shape == (96, 1366)
    # without the target the same audio already lands on 1366 frames
    spec = mel_spectrogram(audio, MelConfig(12000, 96, 1, "dB"))
    assert spec.n_frames == frame_count(349440, 256)
    assert spec.n_frames == 1366


def test_mel_spectrogram_target_crop_and_pad():
    audio = AudioBuffer(sine(1000.0, 12000), 12000)
    natural = mel_spectrogram(audio, MelConfig(12000, 48)).n_frames
    cropped = mel_spectrogram(audio, MelConfig(12000, 48, target_frames=natural - 5))
    assert cropped.n_frames == natural - 5
    padded_db = mel_spectrogram(audio, MelConfig(12000, 48, target_frames=natural + 5))
    assert padded_db.n_frames == natural + 5
    assert padded_db.values[:, -5:] == pytest.approx(compress_db(0.0), abs=0.0)
    padded_log = mel_spectrogram(
        audio, MelConfig(12000, 48, compression="log", target_frames=natural + 5)
    )
    assert np.all(padded_log.values[:, -5:] == 0.0)


def test_mel_spectrogram_zero_audio():
    audio = AudioBuffer(np.zeros(12000), 12000)
    log_spec = mel_spectrogram(audio, MelConfig(12000, 96, compression="log"))
    assert np.all(log_spec.values == 0.0)
    db_spec = mel_spectrogram(audio, MelConfig(12000, 96, compression="dB"))
    assert db_spec.values == pytest.approx(-100.0, abs=1e-9)


def test_mel_spectrogram_tone_row(rng):
    # at 96 mels the argmax row is the one whose center is nearest the tone
    audio = AudioBuffer(sine(1500.0, 12000), 12000)
    config = MelConfig(12000, 96)
    spec = mel_spectrogram(audio, config)
    fb = mel_filterbank(config)
    expected_row = int(np.argmin(np.abs(fb.center_freqs - 1500.0)))
    assert int(np.argmax(spec.values.mean(axis=1))) == expected_row


def test_mel_spectrogram_rejects_rate_mismatch():
    audio = AudioBuffer(np.zeros(16000), 16000)
    with pytest.raises(ValueError, match="resample"):
        mel_spectrogram(audio, MelConfig(12000, 96))


def test_mel_output_nonincreasing_under_compression_order(rng):
    # both compressions are order-preserving on the same mel powers
    audio = AudioBuffer(rng.uniform(-0.5, 0.5, 24000), 12000)
    db_spec = mel_spectrogram(audio, MelConfig(12000, 48, compression="dB"))
    log_spec = mel_spectrogram(audio, MelConfig(12000, 48, compression="log"))
    flat_db = db_spec.values.ravel()
    flat_log = log_spec.values.ravel()
    order = np.argsort(flat_log)
    assert np.all(np.diff(flat_db[order]) >= -1e-9)


# ------------------------------------------------------------ config grid

def test_config_validation():
    with pytest.raises(ValueError):
        MelConfig(12000, 0)
    with pytest.raises(ValueError):
        MelConfig(12000, 96, 0)
    with pytest.raises(ValueError):
        MelConfig(12000, 96, compression="mu-law")
    with pytest.raises(ValueError):
        MelConfig(12000, 96, frame_size=511)
    with pytest.raises(ValueError):
        MelConfig(12000, 96, fmax=6001.0)
    with pytest.raises(ValueError):
        MelConfig(12000, 96, fmin=-1.0)
    with pytest.raises(ValueError):
        MelConfig(12000, 96, fmin=6000.0)
    with pytest.raises(ValueError):
        MelConfig(12000, 96, target_frames=0)


def test_config_defaults_and_hop():
    config = MelConfig(16000, 48, 4)
    assert config.fmax == 8000.0
    assert config.hop == 1024
    assert config.config_id == "16000Hz-48mel-x4-dB"


def test_offgrid_config_warns_on_grid_silent(recwarn):
    import warnings

    with pytest.warns(GridWarning):
        MelConfig(22050, 96)
    with pytest.warns(GridWarning):
        MelConfig(12000, 8, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        MelConfig(12000, 96, 10)
        MelConfig(16000, 8, 1)


def test_is_grid_config():
    assert is_grid_config(12000, 128, 10)
    assert is_grid_config(16000, 8, 1)
    assert not is_grid_config(12000, 8, 2)
    assert not is_grid_config(22050, 96, 1)
    assert not is_grid_config(12000, 64, 1)


def test_enumerate_grid_contents():
    grid = enumerate_grid()
    assert len(grid) == 88
    cells = {(c.sample_rate, c.n_mels, c.hop_multiplier, c.compression) for c in grid}
    assert len(cells) == 88
    expected = set()
    for sr in (12000, 16000):
        for comp in ("log", "dB"):
            for mels in (128, 96, 48):
                for hop in (1, 2, 3, 4, 5, 10):
                    expected.add((sr, mels, hop, comp))
            for mels in (32, 24, 16, 8):
                expected.add((sr, mels, 1, comp))
    assert cells == expected


def test_benchmark_frames_12k_follows_frame_count():
    for hop_multiplier in (1, 2, 3, 4, 5, 10):
        assert benchmark_frames(12000, hop_multiplier) == frame_count(
            349440, 256 * hop_multiplier
        )


def test_benchmark_frames_16k_reference_column():
    # carried as-is from the published pooling tables (different edge
    # convention than the 12 kHz column; see module docs)
    assert [benchmark_frames(16000, h) for h in (1, 2, 3, 4, 5, 10)] == [
        1820, 910, 607, 455, 364, 182,
    ]


def test_benchmark_frames_rejects_offgrid():
    with pytest.raises(ValueError):
        benchmark_frames(22050, 1)
    with pytest.raises(ValueError):
        benchmark_frames(12000, 7)


# ------------------------------------------------------------ container io

def test_mspec_roundtrip(tmp_path, rng):
    config = MelConfig(16000, 48, 2, "log")
    values = rng.standard_normal((48, 91)).astype(np.float32)
    spec_in = MelSpectrogram(values=values.astype(np.float64), config=config)
    path = tmp_path / "clip.mspec"
    n_bytes = write_mspec(path, spec_in)
    assert n_bytes == MSPEC_HEADER_SIZE + 48 * 91 * 4
    assert path.stat().st_size == n_bytes
    spec_out = read_mspec(path)
    assert spec_out.values.dtype == np.float32
    assert np.array_equal(spec_out.values, values)
    assert spec_out.config.sample_rate == 16000
    assert spec_out.config.n_mels == 48
    assert spec_out.config.hop_multiplier == 2
    assert spec_out.config.compression == "log"
    assert spec_out.config.frame_size == 512


def test_mspec_header_layout(tmp_path):
    config = MelConfig(12000, 96, 1, "dB")
    spec = MelSpectrogram(values=np.zeros((96, 3)), config=config)
    path = tmp_path / "h.mspec"
    write_mspec(path, spec)
    raw = path.read_bytes()
    assert MSPEC_HEADER_SIZE == 40
    header, payload = raw[:40], raw[40:]
    assert len(payload) == 96 * 3 * 4
    # parse with an independently written layout
    assert header[:8] == b"MSPEC1\x00\x00"
    version, rate = struct.unpack("<H", header[8:10])[0], struct.unpack("<I", header[10:14])[0]
    assert version == 1
    assert rate == 12000
    n_mels = struct.unpack("<H", header[14:16])[0]
    hop = struct.unpack("<I", header[16:20])[0]
    frame = struct.unpack("<I", header[20:24])[0]
    assert (n_mels, hop, frame) == (96, 256, 512)
    assert header[24] == 0  # dB
    assert struct.unpack("<I", header[26:30])[0] == 3  # frames
    assert header[30] == 0  # float32
    assert header[31:40] == b"\x00" * 9


def test_mspec_compression_codes(tmp_path):
    for compression, code in (("dB", 0), ("log", 1)):
        spec = MelSpectrogram(values=np.zeros((8, 2)), config=MelConfig(16000, 8, 1, compression))
        path = tmp_path / f"{compression}.mspec"
        write_mspec(path, spec)
        assert path.read_bytes()[24] == code


def test_mspec_rejects_malformed(tmp_path):
    config = MelConfig(12000, 48)
    spec = MelSpectrogram(values=np.zeros((48, 4)), config=config)
    good = tmp_path / "good.mspec"
    write_mspec(good, spec)
    raw = bytearray(good.read_bytes())

    bad_magic = tmp_path / "magic.mspec"
    bad_magic.write_bytes(b"XSPEC1\x00\x00" + bytes(raw[8:]))
    with pytest.raises(MspecFormatError, match="magic"):
        read_mspec(bad_magic)

    bad_version = tmp_path / "version.mspec"
    tampered = bytearray(raw)
    tampered[8:10] = struct.pack("<H", 9)
    bad_version.write_bytes(bytes(tampered))
    with pytest.raises(MspecFormatError, match="version"):
        read_mspec(bad_version)

    bad_dtype = tmp_path / "dtype.mspec"
    tampered = bytearray(raw)
    tampered[30] = 7
    bad_dtype.write_bytes(bytes(tampered))
    with pytest.raises(MspecFormatError, match="dtype"):
        read_mspec(bad_dtype)

    truncated = tmp_path / "short.mspec"
    truncated.write_bytes(bytes(raw[:60]))
    with pytest.raises(MspecFormatError, match="truncated"):
        read_mspec(truncated)

    header_only = tmp_path / "tiny.mspec"
    header_only.write_bytes(bytes(raw[:20]))
    with pytest.raises(MspecFormatError, match="truncated"):
        read_mspec(header_only)
