"""Walk a synthetic clip through the whole mel front-end.

Synthesizes two seconds of a 1500 Hz tone over pink-ish noise, extracts
mel spectrograms at a full-resolution and a reduced configuration, and
round-trips the result through the binary .mspec container.
"""

import tempfile
from pathlib import Path

import numpy as np

from melgauge import (
    AudioBuffer,
    MelConfig,
    mel_filterbank,
    mel_spectrogram,
    read_mspec,
    write_mspec,
)

rate = 12000
rng = np.random.default_rng(7)
t = np.arange(2 * rate) / rate
tone = 0.4 * np.sin(2 * np.pi * 1500.0 * t)
noise = 0.02 * np.cumsum(rng.standard_normal(t.size))
noise /= max(1.0, np.abs(noise).max() / 0.1)
audio = AudioBuffer(tone + noise, rate)

full = MelConfig(rate, 96, hop_multiplier=1, compression="dB")
lean = MelConfig(rate, 48, hop_multiplier=2, compression="dB")

for config in (full, lean):
    mel = mel_spectrogram(audio, config)
    bank = mel_filterbank(config)
    peak_row = int(np.argmax(mel.values.mean(axis=1)))
    print(f"{config.config_id}:")
    print(f"  shape          {mel.values.shape[0]} mels x {mel.values.shape[1]} frames")
    print(f"  hop            {config.hop} samples ({config.hop / rate * 1000:.1f} ms)")
    print(f"  tone lands on  row {peak_row} (center {bank.center_freqs[peak_row]:.0f} Hz)")

# the reduced config carries a quarter of the numbers
full_cells = 96 * mel_spectrogram(audio, full).values.shape[1]
lean_cells = 48 * mel_spectrogram(audio, lean).values.shape[1]
print(f"\ncell count ratio full/lean: {full_cells / lean_cells:.2f}")

with tempfile.TemporaryDirectory() as workdir:
    path = Path(workdir) / "clip.mspec"
    mel = mel_spectrogram(audio, full)
    n_bytes = write_mspec(path, mel)
    again = read_mspec(path)
    assert np.array_equal(again.values, mel.values.astype(np.float32))
    print(f"\nwrote {n_bytes} bytes, read back {again.values.shape} "
          f"at {again.config.sample_rate} Hz, bit-exact float32")
