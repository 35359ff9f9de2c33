"""Rectifier RF-to-dc conversion, dc load voltage, and output settling.

The conversion efficiency is a nonlinear function of input RF power: it
rises from the noise floor, peaks near the diode's optimum drive, and
collapses past diode breakdown. Two representations are supported:

* ``table`` - a measured grid over (input power dBm, frequency Hz),
  queried with bilinear interpolation and clamped to edge values outside
  the grid. Table files are plain text: first row the frequency axis in
  MHz, then one row per input power (dBm followed by efficiencies).
* ``parametric`` - a closed form for a low-barrier single-diode rectifier:
  logistic rise in the dB domain, scaled so the curve passes exactly
  through ``eta_peak`` at ``peak_dbm``, with an exponential efficiency
  roll-off of ``breakdown_slope`` dB per dB above ``breakdown_dbm``.
  The defaults give 0.25 at -20 dBm and 0.40 at 0 dBm.

The dc output feeds a resistive load through a low-pass filter, so the
output voltage settles toward sqrt(P_dc * R) as a first-order exponential
with time constant ``settle_tau_s``; slots much shorter than the time
constant therefore yield ADC samples that misstate the steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Logistic argument at the peak-power anchor: sigma(ln 9) = 0.9, which with
# the default slope ln(7)/20 puts the rise exactly through (-20 dBm, 0.25)
# when eta_peak = 0.40 at 0 dBm.
_RISE_SHOULDER = math.log(9.0)
DEFAULT_RISE_SLOPE = math.log(7.0) / 20.0


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class EfficiencyCurve:
    """RF-to-dc efficiency versus input power (and frequency)."""

    source: str  # "table" or "parametric"
    # table mode
    power_axis_dbm: np.ndarray | None = None
    freq_axis_hz: np.ndarray | None = None
    table: np.ndarray | None = None
    # parametric mode
    eta_peak: float = 0.40
    peak_dbm: float = 0.0
    rise_slope: float = DEFAULT_RISE_SLOPE
    breakdown_dbm: float = 3.0
    breakdown_slope: float = 3.0

    def __post_init__(self):
        if self.source == "table":
            p = np.asarray(self.power_axis_dbm, dtype=float)
            f = np.asarray(self.freq_axis_hz, dtype=float)
            t = np.asarray(self.table, dtype=float)
            object.__setattr__(self, "power_axis_dbm", p)
            object.__setattr__(self, "freq_axis_hz", f)
            object.__setattr__(self, "table", t)
            if p.ndim != 1 or f.ndim != 1 or t.shape != (p.size, f.size):
                raise ValidationError("table must be (len(power_axis), len(freq_axis))")
            if p.size > 1 and not np.all(np.diff(p) > 0):
                raise ValidationError("power axis must be strictly increasing")
            if f.size > 1 and not np.all(np.diff(f) > 0):
                raise ValidationError("frequency axis must be strictly increasing")
            if not np.all((t >= 0.0) & (t <= 1.0)):
                raise ValidationError("efficiencies must lie in [0, 1]")
        elif self.source == "parametric":
            if not 0 < self.eta_peak <= 0.9:
                # sigma(shoulder) = 0.9 caps the logistic ceiling at eta_peak/0.9
                raise ValidationError("eta_peak must be in (0, 0.9]")
            if self.rise_slope <= 0 or self.breakdown_slope <= 0:
                raise ValidationError("slopes must be > 0")
            if self.breakdown_dbm < self.peak_dbm:
                raise ValidationError("breakdown_dbm must be >= peak_dbm")
        else:
            raise ValidationError(f"unknown curve source {self.source!r}")

    @classmethod
    def parametric(cls, eta_peak: float = 0.40, peak_dbm: float = 0.0,
                   rise_slope: float = DEFAULT_RISE_SLOPE,
                   breakdown_dbm: float = 3.0,
                   breakdown_slope: float = 3.0) -> "EfficiencyCurve":
        return cls("parametric", eta_peak=eta_peak, peak_dbm=peak_dbm,
                   rise_slope=rise_slope, breakdown_dbm=breakdown_dbm,
                   breakdown_slope=breakdown_slope)

    @classmethod
    def from_table(cls, power_axis_dbm, freq_axis_hz, table) -> "EfficiencyCurve":
        return cls("table", power_axis_dbm=np.asarray(power_axis_dbm, dtype=float),
                   freq_axis_hz=np.asarray(freq_axis_hz, dtype=float),
                   table=np.asarray(table, dtype=float))

    def efficiency(self, p_rf_w, freq_hz):
        """Efficiency in [0, 1]; zero input power maps to zero. Vectorized."""
        p = np.asarray(p_rf_w, dtype=float)
        if np.any(p < 0):
            raise ValidationError("p_rf_w must be >= 0")
        scalar = p.ndim == 0 and np.ndim(freq_hz) == 0
        p = np.atleast_1d(p)
        f = np.broadcast_to(np.atleast_1d(np.asarray(freq_hz, dtype=float)), p.shape) \
            if np.ndim(freq_hz) != 0 else np.full(p.shape, float(freq_hz))
        out = np.zeros(p.shape)
        live = p > 0
        if np.any(live):
            p_dbm = 10.0 * np.log10(p[live]) + 30.0
            if self.source == "table":
                out[live] = self._lookup(p_dbm, f[live])
            else:
                out[live] = self._closed_form(p_dbm)
        return float(out[0]) if scalar else out

    def _closed_form(self, p_dbm: np.ndarray) -> np.ndarray:
        rise = _sigmoid(self.rise_slope * (p_dbm - self.peak_dbm) + _RISE_SHOULDER)
        eta = self.eta_peak * rise / _sigmoid(_RISE_SHOULDER)
        over = p_dbm > self.breakdown_dbm
        if np.any(over):
            eta[over] *= 10.0 ** (-self.breakdown_slope
                                  * (p_dbm[over] - self.breakdown_dbm) / 10.0)
        return np.clip(eta, 0.0, 1.0)

    def _lookup(self, p_dbm: np.ndarray, f_hz: np.ndarray) -> np.ndarray:
        i0, i1, wp = _axis_weights(self.power_axis_dbm, p_dbm)
        j0, j1, wf = _axis_weights(self.freq_axis_hz, f_hz)
        t = self.table
        return ((1 - wp) * (1 - wf) * t[i0, j0] + (1 - wp) * wf * t[i0, j1]
                + wp * (1 - wf) * t[i1, j0] + wp * wf * t[i1, j1])


def _axis_weights(axis: np.ndarray, x: np.ndarray):
    """Clamped linear-interpolation indices and weights along one axis."""
    if axis.size == 1:
        z = np.zeros(x.shape, dtype=int)
        return z, z, np.zeros(x.shape)
    hi = np.clip(np.searchsorted(axis, x, side="right"), 1, axis.size - 1)
    lo = hi - 1
    w = (x - axis[lo]) / (axis[hi] - axis[lo])
    return lo, hi, np.clip(w, 0.0, 1.0)


def load_efficiency_table(path) -> EfficiencyCurve:
    """Load a plain-text efficiency table (see module docstring for format)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if len(rows) < 2:
        raise ValidationError(f"{path}: need a frequency row plus at least one power row")
    freq_mhz = np.asarray(rows[0])
    width = freq_mhz.size + 1
    if any(len(r) != width for r in rows[1:]):
        raise ValidationError(f"{path}: body rows must have {width} columns")
    body = np.asarray(rows[1:])
    return EfficiencyCurve.from_table(body[:, 0], freq_mhz * 1e6, body[:, 1:])


@dataclass(frozen=True)
class RectennaConfig:
    """Conversion curve plus the dc-side load and settling dynamics."""

    curve: EfficiencyCurve = field(default_factory=EfficiencyCurve.parametric)
    load_ohms: float = 10_000.0
    settle_tau_s: float = 0.002

    def __post_init__(self):
        if self.load_ohms <= 0:
            raise ValidationError("load_ohms must be > 0")
        if self.settle_tau_s <= 0:
            raise ValidationError("settle_tau_s must be > 0")


def efficiency(curve: EfficiencyCurve, p_rf_w, freq_hz):
    return curve.efficiency(p_rf_w, freq_hz)


def output_dc_power(p_rf_w, curve: EfficiencyCurve, freq_hz):
    """dc output power: input RF power times the efficiency at that power."""
    p = np.asarray(p_rf_w, dtype=float)
    out = p * curve.efficiency(p, freq_hz)
    return float(out) if out.ndim == 0 else out


def dc_voltage(p_dc_w, load_ohms: float):
    """Voltage across a resistive load dissipating ``p_dc_w``."""
    if load_ohms <= 0:
        raise ValidationError("load_ohms must be > 0")
    p = np.asarray(p_dc_w, dtype=float)
    if np.any(p < 0):
        raise ValidationError("p_dc_w must be >= 0")
    v = np.sqrt(p * load_ohms)
    return float(v) if v.ndim == 0 else v


def settled_voltage(v_target: float, v_initial: float, elapsed_s: float,
                    cfg: RectennaConfig) -> float:
    """First-order settling of the output voltage after a step change."""
    if elapsed_s < 0:
        raise ValidationError("elapsed_s must be >= 0")
    if elapsed_s == 0:
        return v_initial
    return v_target + (v_initial - v_target) * math.exp(-elapsed_s / cfg.settle_tau_s)


def settling_energy(v_initial: float, v_target: float, duration_s: float,
                    cfg: RectennaConfig) -> tuple[float, float]:
    """Energy delivered to the load while settling, and the end voltage.

    Integrates v(t)^2 / R in closed form over one settling segment, which
    keeps per-slot energy accounting exact.
    """
    if duration_s < 0:
        raise ValidationError("duration_s must be >= 0")
    if duration_s == 0:
        return 0.0, v_initial
    tau = cfg.settle_tau_s
    delta = v_initial - v_target
    e1 = math.exp(-duration_s / tau)
    energy = (v_target ** 2 * duration_s
              + 2.0 * v_target * delta * tau * (1.0 - e1)
              + delta ** 2 * (tau / 2.0) * (1.0 - e1 ** 2)) / cfg.load_ohms
    return energy, v_target + delta * e1
