"""EEG band power and inter-channel coherence.

Spectra are Welch estimates (Hann window, 2 s segments, 50% overlap). Band
power integrates the one-sided PSD over the half-open interval [lo, hi), so
adjacent bands never share a frequency bin.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.signal

from adkg.errors import DataError, SchemaError
from adkg.ingest import Cohort, Group, Modality

MONTAGE = ("Fp1", "Fp2", "C3", "T3", "T4", "F7", "F8", "P3", "P4", "O1")
SEGMENT_SECONDS = 2.0
OVERLAP = 0.5
MIN_COHERENCE_SEGMENTS = 8


@dataclass(frozen=True)
class Band:
    name: str
    lo: float
    hi: float


BANDS = {
    "delta": Band("delta", 0.5, 4.0),
    "theta": Band("theta", 4.0, 8.0),
    "alpha": Band("alpha", 8.0, 13.0),
    "beta": Band("beta", 13.0, 30.0),
}


@dataclass(frozen=True, eq=False)
class EegRecording:
    channels: tuple
    samples: np.ndarray  # (n_channels, n_samples)
    fs: float
    subject_id: str = ""
    group: Group | None = None

    def __post_init__(self):
        if self.fs <= 0:
            raise DataError("sampling rate must be positive")
        if self.samples.ndim != 2 or self.samples.shape[0] != len(self.channels):
            raise DataError("samples must be (n_channels, n_samples)")
        if len(set(self.channels)) != len(self.channels):
            raise DataError("channel names must be unique")

    def channel(self, name: str) -> np.ndarray:
        try:
            return self.samples[self.channels.index(name)]
        except ValueError:
            raise SchemaError(f"unknown channel {name!r}") from None

    @property
    def nperseg(self) -> int:
        return int(round(SEGMENT_SECONDS * self.fs))


def _band(band) -> Band:
    return BANDS[band] if isinstance(band, str) else band


def _n_segments(n: int, nperseg: int) -> int:
    step = nperseg - int(nperseg * OVERLAP)
    return 0 if n < nperseg else 1 + (n - nperseg) // step


def _check_nyquist(band: Band, fs: float):
    if band.hi >= fs / 2:
        raise DataError(f"{band.name} upper edge {band.hi} Hz is not below Nyquist ({fs / 2} Hz)")


def _band_mask(freqs, band: Band):
    return (freqs >= band.lo) & (freqs < band.hi)


def psd(rec: EegRecording, channel: str):
    x = rec.channel(channel)
    if x.size < 2 * rec.nperseg:
        raise DataError(f"recording too short: {x.size} samples < 2 segments of {rec.nperseg}")
    return scipy.signal.welch(x, fs=rec.fs, window="hann", nperseg=rec.nperseg,
                              noverlap=int(rec.nperseg * OVERLAP), detrend="constant",
                              scaling="density")


def band_power(rec: EegRecording, channel: str, band) -> float:
    """Absolute power in ``band`` (signal units squared)."""
    band = _band(band)
    _check_nyquist(band, rec.fs)
    freqs, p = psd(rec, channel)
    df = freqs[1] - freqs[0]
    return float(max(p[_band_mask(freqs, band)].sum() * df, 0.0))


def coherence(rec: EegRecording, ch_a: str, ch_b: str, band) -> float:
    """Magnitude-squared coherence averaged over the band's frequency bins."""
    if ch_a == ch_b:
        raise DataError("coherence of a channel with itself is degenerate")
    band = _band(band)
    _check_nyquist(band, rec.fs)
    a, b = rec.channel(ch_a), rec.channel(ch_b)
    segs = _n_segments(a.size, rec.nperseg)
    if segs < MIN_COHERENCE_SEGMENTS:
        raise DataError(f"only {segs} averaging segments, need {MIN_COHERENCE_SEGMENTS}")
    freqs, cxy = scipy.signal.coherence(a, b, fs=rec.fs, window="hann", nperseg=rec.nperseg,
                                        noverlap=int(rec.nperseg * OVERLAP), detrend="constant")
    vals = cxy[_band_mask(freqs, band)]
    if vals.size == 0:
        raise DataError(f"no frequency bins in {band.name}")
    return float(np.clip(np.nan_to_num(vals.mean(), nan=0.0), 0.0, 1.0))


def recording_features(rec: EegRecording, bands: Sequence[str] = tuple(BANDS),
                       coherence_pairs: Sequence[tuple] = ()) -> dict:
    """Per-channel band powers plus coherence for the requested channel pairs.

    Feature names follow ``<channel>_<band>`` and ``coh_<a>_<b>_<band>``;
    ``<band>_mean`` is the montage average.
    """
    out = {}
    for band in bands:
        vals = []
        for ch in rec.channels:
            v = band_power(rec, ch, band)
            out[f"{ch}_{band}"] = v
            vals.append(v)
        out[f"{band}_mean"] = float(np.mean(vals))
    for a, b in coherence_pairs:
        for band in bands:
            out[f"coh_{a}_{b}_{band}"] = coherence(rec, a, b, band)
    return out


def recordings_to_cohort(recordings: Sequence[EegRecording], bands=tuple(BANDS),
                         coherence_pairs=()) -> Cohort:
    rows, names = [], None
    for rec in recordings:
        feats = recording_features(rec, bands, coherence_pairs)
        if names is None:
            names = list(feats)
        elif list(feats) != names:
            raise DataError(f"recording {rec.subject_id} has a different channel layout")
        rows.append([feats[k] for k in names])
    if not rows:
        raise DataError("empty dataset")
    return Cohort(Modality.EEG, tuple(r.subject_id for r in recordings), tuple(names),
                  np.array(rows), tuple(r.group for r in recordings),
                  notes=("band powers are absolute Welch estimates; *_mean columns are montage averages",))


def read_eeg_csv(path, fs: float, subject_id: str, group) -> EegRecording:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if len(lines) < 2:
        raise DataError(f"{path}: empty recording")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    try:
        data = np.array([[float(c) for c in row] for row in reader], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    return EegRecording(tuple(header), data.T.copy(), float(fs), subject_id, Group(group))


def write_eeg_csv(rec: EegRecording, header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rec.channels)
    for row in rec.samples.T:
        w.writerow([f"{v:.6g}" for v in row])
    return buf.getvalue()


def synthetic_recording(rng: np.random.Generator, subject_id: str, group: Group, *,
                        fs: float = 128.0, seconds: float = 30.0, alpha_amp: float = 1.0,
                        beta_amp: float = 0.5, noise: float = 1.0,
                        channels: Sequence[str] = MONTAGE, shared: float = 0.5) -> EegRecording:
    """Sinusoid-plus-noise fixture: alpha (10 Hz) and beta (20 Hz) tones over white noise.

    ``shared`` mixes a common noise source into every channel so that
    coherence is nonzero.
    """
    n = int(round(fs * seconds))
    t = np.arange(n) / fs
    common = rng.standard_normal(n)
    rows = []
    for _ in channels:
        phase_a, phase_b = rng.uniform(0, 2 * np.pi, 2)
        own = rng.standard_normal(n)
        x = (alpha_amp * np.sin(2 * np.pi * 10.0 * t + phase_a)
             + beta_amp * np.sin(2 * np.pi * 20.0 * t + phase_b)
             + noise * (np.sqrt(shared) * common + np.sqrt(1 - shared) * own))
        rows.append(x)
    return EegRecording(tuple(channels), np.array(rows), fs, subject_id, group)


def default_coherence_pairs(channels=MONTAGE) -> list:
    frontal = [c for c in channels if c.startswith(("Fp", "F"))]
    temporal = [c for c in channels if c.startswith("T")]
    return [(a, b) for a, b in itertools.product(frontal, temporal)][:4]
