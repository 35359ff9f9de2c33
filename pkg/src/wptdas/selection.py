"""Antenna/frequency selection over a matrix of candidate dc powers.

The transmitter activates one (antenna, frequency) pair at a time, so
exploiting spatial and frequency diversity reduces to an argmax over the
candidate matrix. Four strategies are supported: joint selection over the
whole matrix, frequency-only (one fixed antenna), antenna-only (one fixed
frequency), and no selection (both fixed). Ties break to the lowest antenna
index, then the lowest frequency index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

STRATEGIES = ("none", "frequency_only", "antenna_only", "joint")

PROVENANCE_STEADY = "steady"
PROVENANCE_ADC = "adc"


def middle_index(count: int) -> int:
    """Default fixed frequency for the single-frequency baselines (1-based)."""
    return (count + 1) // 2


@dataclass(frozen=True)
class CandidateMatrix:
    """(antennas x frequencies) candidate dc powers in watts."""

    values: np.ndarray
    provenance: np.ndarray  # per-entry: PROVENANCE_STEADY or PROVENANCE_ADC

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.size == 0:
            raise ValidationError("candidate matrix must be 2-D and non-empty")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError("candidate powers must be finite and >= 0")
        prov = np.asarray(self.provenance)
        if prov.shape != v.shape:
            raise ValidationError("provenance must match the matrix shape")
        object.__setattr__(self, "provenance", prov)

    @classmethod
    def from_powers(cls, values, provenance: str = PROVENANCE_STEADY) -> "CandidateMatrix":
        v = np.asarray(values, dtype=float)
        return cls(v, np.full(v.shape, provenance, dtype=object))

    @property
    def num_antennas(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_frequencies(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class SelectionDecision:
    """Chosen 1-based (antenna, frequency) pair and its candidate value."""

    antenna: int
    frequency: int
    value: float
    strategy: str


def select_joint(c: CandidateMatrix) -> SelectionDecision:
    """Argmax over all entries (first maximum in row-major order wins)."""
    flat = int(np.argmax(c.values))
    m, n = divmod(flat, c.num_frequencies)
    return SelectionDecision(m + 1, n + 1, float(c.values[m, n]), "joint")


def select_frequency_only(c: CandidateMatrix, fixed_antenna: int = 1) -> SelectionDecision:
    """Argmax over one antenna's row."""
    _check_antenna(c, fixed_antenna)
    row = c.values[fixed_antenna - 1]
    n = int(np.argmax(row))
    return SelectionDecision(fixed_antenna, n + 1, float(row[n]), "frequency_only")


def select_antenna_only(c: CandidateMatrix, fixed_frequency: int | None = None) -> SelectionDecision:
    """Argmax over one frequency's column (defaults to the middle frequency)."""
    if fixed_frequency is None:
        fixed_frequency = middle_index(c.num_frequencies)
    _check_frequency(c, fixed_frequency)
    col = c.values[:, fixed_frequency - 1]
    m = int(np.argmax(col))
    return SelectionDecision(m + 1, fixed_frequency, float(col[m]), "antenna_only")


def no_selection(c: CandidateMatrix, fixed_antenna: int = 1,
                 fixed_frequency: int | None = None) -> SelectionDecision:
    """The fixed (antenna, frequency) entry; the no-diversity baseline."""
    if fixed_frequency is None:
        fixed_frequency = middle_index(c.num_frequencies)
    _check_antenna(c, fixed_antenna)
    _check_frequency(c, fixed_frequency)
    value = float(c.values[fixed_antenna - 1, fixed_frequency - 1])
    return SelectionDecision(fixed_antenna, fixed_frequency, value, "none")


def apply_strategy(c: CandidateMatrix, strategy: str, fixed_antenna: int = 1,
                   fixed_frequency: int | None = None) -> SelectionDecision:
    if strategy == "joint":
        return select_joint(c)
    if strategy == "frequency_only":
        return select_frequency_only(c, fixed_antenna)
    if strategy == "antenna_only":
        return select_antenna_only(c, fixed_frequency)
    if strategy == "none":
        return no_selection(c, fixed_antenna, fixed_frequency)
    raise ValidationError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def _check_antenna(c: CandidateMatrix, antenna: int):
    if not 1 <= antenna <= c.num_antennas:
        raise ValidationError(f"antenna {antenna} out of range 1..{c.num_antennas}")


def _check_frequency(c: CandidateMatrix, frequency: int):
    if not 1 <= frequency <= c.num_frequencies:
        raise ValidationError(f"frequency {frequency} out of range 1..{c.num_frequencies}")
