"""Transfer functions on the fixed low-frequency grid and spectral post-processing.

The dataset grid runs from 1 Hz to 354 Hz in 0.5 Hz steps (707 points); a
1 Hz decimated variant (354 points) is also legal for storage.  Decimation
for resolution studies may produce coarser grids, which remain valid
TransferFunction objects but are rejected by the dataset writer.
"""

import csv as _csv
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

__all__ = [
    "F_START", "F_STOP", "F_STEP", "standard_grid", "TransferFunction",
    "SpectralCorrection", "SourceSpec", "apply_source_correction",
    "normalize_spl", "downsample_resolution", "export_tf_csv", "read_tf_csv",
    "SPL_REF_DB", "NORMALIZED_AMPLITUDE",
]

F_START = 1.0
F_STOP = 354.0
F_STEP = 0.5

# 91 dB SPL (rms, re 20 uPa) at 1 Hz for a peak amplitude treated as
# amplitude/sqrt(2) rms; the resulting peak amplitude is 1.0036 Pa,
# i.e. the "1 Pa <-> about 91 dB" convention.
SPL_REF_DB = 91.0
NORMALIZED_AMPLITUDE = np.sqrt(2.0) * 20e-6 * 10.0 ** (SPL_REF_DB / 20.0)

_DATASET_STEPS = (0.5, 1.0)


def standard_grid(f_step=F_STEP):
    """The dataset frequency grid, 1..354 Hz inclusive."""
    n = int(round((F_STOP - F_START) / f_step)) + 1
    return F_START + f_step * np.arange(n)


@dataclass
class TransferFunction:
    """Complex pressure spectrum on a uniform frequency grid with provenance ids."""

    values: np.ndarray
    f_start: float = F_START
    f_step: float = F_STEP
    room_id: int = -1
    config_id: int = -1
    source_id: int = -1
    receiver_id: int = -1
    source_pos: tuple = ()
    receiver_pos: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or self.values.size < 3:
            raise DomainError("transfer function needs a 1-D spectrum of at least 3 bins")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("transfer function contains non-finite values")

    @property
    def frequencies(self):
        return self.f_start + self.f_step * np.arange(self.values.size)

    @property
    def f_stop(self):
        return self.f_start + self.f_step * (self.values.size - 1)

    @property
    def magnitude(self):
        return np.abs(self.values)

    @property
    def magnitude_db(self):
        return 20.0 * np.log10(np.maximum(np.abs(self.values), 1e-300))

    def is_dataset_grid(self):
        """True when the grid matches the storable dataset layout exactly."""
        if self.f_start != F_START or self.f_step not in _DATASET_STEPS:
            return False
        return self.values.size == int(round((F_STOP - F_START) / self.f_step)) + 1

    def bin_index(self, f):
        idx = (f - self.f_start) / self.f_step
        i = int(round(idx))
        if abs(idx - i) > 1e-6 or not 0 <= i < self.values.size:
            raise DomainError(f"{f} Hz is not on this transfer function's grid")
        return i

    def with_values(self, values):
        return replace(self, values=np.asarray(values, dtype=complex))


@dataclass(frozen=True)
class SpectralCorrection:
    """Loudspeaker response model multiplied onto a simulated spectrum.

    kind "flat" is the exact identity.  kind "bandpass" cascades a
    second-order high-pass (corner f_lo, resonance quality q_lo) with a
    second-order Butterworth low-pass at f_hi, mimicking the band-pass
    character of a real source.  kind "file" interpolates a measured gain
    table linearly in log-frequency.
    """

    kind: str = "flat"
    f_lo: float = 50.0
    q_lo: float = 1.0 / np.sqrt(2.0)
    f_hi: float = 5000.0
    table_f: tuple = field(default=())
    table_gain: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("flat", "bandpass", "file"):
            raise DomainError(f"unknown correction kind {self.kind!r}")
        if self.kind == "bandpass" and (self.f_lo <= 0 or self.f_hi <= 0 or self.q_lo <= 0):
            raise DomainError("bandpass correction needs positive f_lo, q_lo, f_hi")
        if self.kind == "file" and len(self.table_f) < 2:
            raise DomainError("file correction needs at least two table rows")

    def gain(self, f):
        """Complex gain on the given frequencies."""
        farr = np.asarray(f, dtype=float)
        if self.kind == "flat":
            return np.ones_like(farr, dtype=complex)
        if self.kind == "bandpass":
            s = 1j * farr  # normalized by 2*pi, ratios only
            hp = s ** 2 / (s ** 2 + s * self.f_lo / self.q_lo + self.f_lo ** 2)
            lp = self.f_hi ** 2 / (s ** 2 + s * self.f_hi / np.sqrt(2.0) + self.f_hi ** 2)
            return hp * lp
        tf = np.asarray(self.table_f, dtype=float)
        if farr.min() < tf.min() or farr.max() > tf.max():
            raise DomainError(
                f"correction table covers [{tf.min():g}, {tf.max():g}] Hz but the "
                f"spectrum needs [{farr.min():g}, {farr.max():g}] Hz")
        tg = np.asarray(self.table_gain, dtype=complex)
        logf = np.log(farr)
        logt = np.log(tf)
        re = np.interp(logf, logt, tg.real)
        im = np.interp(logf, logt, tg.imag)
        return re + 1j * im

    @classmethod
    def from_csv(cls, path):
        """Load a gain table: 'frequency_hz,gain_db' or 'frequency_hz,re,im'.

        Comment lines start with '#'; frequencies must ascend.
        """
        fs, gains = [], []
        with open(path, newline="") as fh:
            for row in _csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                vals = [float(v) for v in row]
                fs.append(vals[0])
                if len(vals) == 2:
                    gains.append(10.0 ** (vals[1] / 20.0))
                elif len(vals) == 3:
                    gains.append(vals[1] + 1j * vals[2])
                else:
                    raise DomainError(f"correction CSV rows need 2 or 3 columns, got {len(vals)}")
        if any(f2 <= f1 for f1, f2 in zip(fs, fs[1:])):
            raise DomainError("correction CSV frequencies must be strictly ascending")
        return cls(kind="file", table_f=tuple(fs), table_gain=tuple(gains))


@dataclass(frozen=True)
class SourceSpec:
    """Unit-volume-velocity monopole with an optional spectral correction."""

    position: tuple
    strength: float = 1.0
    correction: SpectralCorrection = SpectralCorrection()


def apply_source_correction(tf, correction):
    """Multiply the correction's complex gain onto the spectrum, pointwise."""
    if correction.kind == "flat":
        return tf.with_values(tf.values.copy())
    return tf.with_values(tf.values * correction.gain(tf.frequencies))


def normalize_spl(tf, ref_db=SPL_REF_DB):
    """Scale the spectrum so the 1 Hz bin sits at ref_db dB SPL (rms, peak/sqrt2).

    The scale factor is real and uniform, so relative spectrum shape and
    phase are untouched.  The operation is idempotent.
    """
    i = tf.bin_index(1.0)
    mag = abs(tf.values[i])
    if mag == 0:
        raise DomainError("cannot normalize: spectrum is zero at 1 Hz")
    target = np.sqrt(2.0) * 20e-6 * 10.0 ** (ref_db / 20.0)
    return tf.with_values(tf.values * (target / mag))


def downsample_resolution(tf, factor=2):
    """Keep every factor-th bin starting at the first; metadata updated."""
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise DomainError(f"decimation factor must be a positive integer, got {factor!r}")
    return replace(tf, values=tf.values[::factor].copy(), f_step=tf.f_step * factor)


def export_tf_csv(tf, path, sidecar=True):
    """Write 'frequency_hz,re,im,magnitude_db' rows plus a JSON metadata sidecar."""
    freqs = tf.frequencies
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["frequency_hz", "re", "im", "magnitude_db"])
        for f, v, db in zip(freqs, tf.values, tf.magnitude_db):
            w.writerow([f"{f:.6g}", f"{v.real:.9e}", f"{v.imag:.9e}", f"{db:.4f}"])
    if sidecar:
        meta = {
            "f_start": tf.f_start, "f_step": tf.f_step, "n_bins": int(tf.values.size),
            "room_id": tf.room_id, "config_id": tf.config_id,
            "source_id": tf.source_id, "receiver_id": tf.receiver_id,
            "source_pos": list(tf.source_pos), "receiver_pos": list(tf.receiver_pos),
        }
        with open(str(path) + ".json", "w") as fh:
            json.dump(meta, fh, indent=2)


def read_tf_csv(path):
    """Read a transfer function written by export_tf_csv."""
    fs, vals = [], []
    with open(path, newline="") as fh:
        r = _csv.reader(fh)
        header = next(r)
        if header[:3] != ["frequency_hz", "re", "im"]:
            raise DomainError(f"unrecognized TF CSV header {header!r}")
        for row in r:
            if not row or row[0].lstrip().startswith("#"):
                continue
            fs.append(float(row[0]))
            vals.append(float(row[1]) + 1j * float(row[2]))
    fs = np.asarray(fs)
    if fs.size < 3:
        raise DomainError("TF CSV too short")
    steps = np.diff(fs)
    if not np.allclose(steps, steps[0], rtol=0, atol=1e-9):
        raise DomainError("TF CSV grid is not uniform")
    return TransferFunction(values=np.asarray(vals), f_start=float(fs[0]),
                            f_step=float(steps[0]))
