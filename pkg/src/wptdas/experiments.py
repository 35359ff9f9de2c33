"""Monte Carlo experiment runners and the receiver power-budget report.

Two pipelines share every realization's channel draws:

* :func:`run_sweep` - the idealized pipeline: build the steady-state
  candidate matrix directly and apply each selection strategy to it.
* :func:`run_protocol_experiment` - the same sweep realized through the
  frame protocol (ADC settling, quantization, feedback loss included).

Agreement of the two pipelines under idealized protocol settings is a
regression oracle, so both derive channels from the same per-realization
substreams (see :mod:`wptdas.rng`).

Sweeps over the candidate-set size are nested: the size-k frequency set is
always a subset of the size-(k+1) choice from the same master grid (middle
channel first, then the quartiles, then the band edges), and antenna sets
grow by index. Growing a nested candidate set can never shrink the
per-realization maximum, so selection-gain trends are monotone realization
by realization, not just on average.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import FrequencyGrid, LinkBudget, TapProfile, sample_channel
from .errors import ValidationError
from .protocol import (
    DEFAULT_ADC,
    AdcModel,
    ControlLinkModel,
    EnergyBudget,
    FrameSchedule,
    ReceiverConsumption,
    energy_budget,
    run_frame,
)
from .rectenna import RectennaConfig
from .rng import DOMAIN_CHANNEL, DOMAIN_LINK, substream
from .scheduler import UserState, run_tdma
from .selection import STRATEGIES, CandidateMatrix, apply_strategy
from .signal_chain import dc_power_matrix

RESULT_COLUMNS = "M,N,strategy,user,avg_pdc_watts,stderr_watts,realizations,seed"
SUM_USER = 0  # user id used for multi-user sum rows


def dbm_to_watts(x_dbm):
    """dBm to watts."""
    out = 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)
    return float(out) if out.ndim == 0 else out


def watts_to_dbm(x_w):
    """Watts to dBm; rejects non-positive powers."""
    x = np.asarray(x_w, dtype=float)
    if np.any(x <= 0):
        raise ValidationError("watts_to_dbm needs power > 0")
    out = 10.0 * np.log10(x) + 30.0
    return float(out) if out.ndim == 0 else out


def nested_frequency_indices(total: int, count: int) -> np.ndarray:
    """0-based indices of the size-``count`` nested subset of a grid.

    Priority order: middle channel, lower quartile, upper quartile, first,
    last, then the remaining channels in ascending order. On a 15-channel
    grid this yields {8}, {4,8,12}, {1,4,8,12,15}, ... (1-based).
    """
    if not 1 <= count <= total:
        raise ValidationError(f"subset size {count} outside 1..{total}")
    mid = (total + 1) // 2
    lq = (mid + 1) // 2
    uq = mid + (total - mid + 1) // 2
    priority: list[int] = []
    for idx in (mid, lq, uq, 1, total):
        if 1 <= idx <= total and idx not in priority:
            priority.append(idx)
    for idx in range(1, total + 1):
        if idx not in priority:
            priority.append(idx)
    return np.array(sorted(priority[:count])) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep definition: channel statistics, candidate sets, averaging."""

    profile: TapProfile
    grid: FrequencyGrid
    budget: LinkBudget = field(default_factory=LinkBudget)
    rect: RectennaConfig = field(default_factory=RectennaConfig)
    antenna_sweep: tuple = (1, 2, 3, 4)
    frequency_sweep: tuple = (1, 3, 5, 15)
    strategies: tuple = STRATEGIES
    users: int = 1
    realizations: int = 300
    seed: int = 1
    user_loss_db: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "antenna_sweep", tuple(int(m) for m in self.antenna_sweep))
        object.__setattr__(self, "frequency_sweep", tuple(int(n) for n in self.frequency_sweep))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "user_loss_db", tuple(float(x) for x in self.user_loss_db))
        if self.realizations < 1:
            raise ValidationError("realizations must be >= 1")
        if self.users < 1:
            raise ValidationError("users must be >= 1")
        if not self.antenna_sweep or not self.frequency_sweep:
            raise ValidationError("sweep lists must be non-empty")
        if min(self.antenna_sweep) < 1:
            raise ValidationError("antenna counts must be >= 1")
        if min(self.frequency_sweep) < 1 or max(self.frequency_sweep) > self.grid.count:
            raise ValidationError("frequency subset sizes must lie in 1..grid.count")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ValidationError(f"unknown strategies: {sorted(unknown)}")
        if len(self.user_loss_db) not in (0, self.users):
            raise ValidationError("user_loss_db must have one entry per user")

    @property
    def max_antennas(self) -> int:
        return max(self.antenna_sweep)

    def loss_for_user(self, u: int) -> float:
        return self.user_loss_db[u] if self.user_loss_db else 0.0

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for part in (
            self.profile.name,
            self.profile.delays_s.tobytes(),
            self.profile.powers.tobytes(),
            self.grid.mode,
            self.grid.frequencies_hz.tobytes(),
            repr((self.budget.tx_power_w, self.budget.path_loss_db,
                  self.budget.tx_gain_dbi, self.budget.rx_gain_dbi)),
            repr((self.rect.load_ohms, self.rect.settle_tau_s)),
            self.rect.curve.source,
            repr((self.antenna_sweep, self.frequency_sweep, self.strategies,
                  self.users, self.realizations, self.seed, self.user_loss_db)),
        ):
            h.update(part.encode() if isinstance(part, str) else part)
        if self.rect.curve.source == "table":
            h.update(self.rect.curve.table.tobytes())
        else:
            h.update(repr((self.rect.curve.eta_peak, self.rect.curve.peak_dbm,
                           self.rect.curve.rise_slope, self.rect.curve.breakdown_dbm,
                           self.rect.curve.breakdown_slope)).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class ResultRow:
    m: int
    n: int
    strategy: str
    user: int  # 1-based user id, or SUM_USER for the multi-user sum
    avg_pdc_w: float
    stderr_w: float


@dataclass
class ExperimentResult:
    rows: list
    realizations: int
    seed: int
    config_hash: str
    kind: str = "sweep"

    def get(self, m: int, n: int, strategy: str, user: int = 1) -> ResultRow:
        for r in self.rows:
            if (r.m, r.n, r.strategy, r.user) == (m, n, strategy, user):
                return r
        raise KeyError((m, n, strategy, user))

    def to_csv(self, fh):
        fh.write(f"# wptdas {__version__}\n")
        fh.write(f"# kind={self.kind}\n")
        fh.write(f"# seed={self.seed}\n")
        fh.write(f"# config={self.config_hash}\n")
        fh.write(RESULT_COLUMNS + "\n")
        for r in self.rows:
            fh.write(f"{r.m},{r.n},{r.strategy},{r.user},{r.avg_pdc_w:.12g},"
                     f"{r.stderr_w:.12g},{self.realizations},{self.seed}\n")


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(x.size))


def _sweep_cells(cfg: ExperimentConfig):
    for m in cfg.antenna_sweep:
        for k in cfg.frequency_sweep:
            yield m, k, nested_frequency_indices(cfg.grid.count, k)


def _sweep_chunk(args) -> dict:
    """Per-realization strategy values for realizations [r0, r1).

    Returns {(m, k, strategy): array of shape (r1 - r0, users)}.
    """
    cfg, r0, r1 = args
    cells = list(_sweep_cells(cfg))
    out = {(m, k, s): np.zeros((r1 - r0, cfg.users))
           for m, k, _ in cells for s in cfg.strategies}
    for r in range(r0, r1):
        mats = []
        for u in range(cfg.users):
            ch = sample_channel(cfg.profile, cfg.max_antennas,
                                substream(cfg.seed, DOMAIN_CHANNEL, r, u))
            mats.append(dc_power_matrix(ch, cfg.grid, cfg.budget, cfg.rect.curve,
                                        cfg.loss_for_user(u)))
        for m, k, cols in cells:
            subs = [mat[:m][:, cols] for mat in mats]
            for strategy in cfg.strategies:
                decisions = [apply_strategy(CandidateMatrix.from_powers(sub), strategy)
                             for sub in subs]
                for u in range(cfg.users):
                    own = decisions[u].value
                    passive = sum(
                        float(subs[u][decisions[v].antenna - 1, decisions[v].frequency - 1])
                        for v in range(cfg.users) if v != u
                    )
                    out[(m, k, strategy)][r - r0, u] = (own + passive) / cfg.users
    return out


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Average dc power per (antenna set, frequency set, strategy, user).

    The per-realization pipeline is the idealized one: steady-state
    candidate powers, no frame protocol. With multiple users, frame i of a
    round serves user i's selection while the others harvest passively at
    the served pair; reported values are per-round (cycle) averages.
    ``jobs`` only parallelizes; results are identical for any job count.
    """
    r_total = cfg.realizations
    if jobs <= 1 or r_total < 4:
        chunks = [_sweep_chunk((cfg, 0, r_total))]
        bounds = [(0, r_total)]
    else:
        jobs = min(jobs, r_total)
        edges = np.linspace(0, r_total, jobs + 1).astype(int)
        bounds = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if a < b]
        with ProcessPoolExecutor(max_workers=len(bounds)) as pool:
            chunks = list(pool.map(_sweep_chunk, [(cfg, a, b) for a, b in bounds]))

    merged = {key: np.zeros((r_total, cfg.users)) for key in chunks[0]}
    for (a, b), chunk in zip(bounds, chunks):
        for key, arr in chunk.items():
            merged[key][a:b] = arr

    rows = []
    for m, k, _ in _sweep_cells(cfg):
        for strategy in cfg.strategies:
            arr = merged[(m, k, strategy)]
            for u in range(cfg.users):
                rows.append(ResultRow(m, k, strategy, u + 1,
                                      float(arr[:, u].mean()), _stderr(arr[:, u])))
            if cfg.users > 1:
                total = arr.sum(axis=1)
                rows.append(ResultRow(m, k, strategy, SUM_USER,
                                      float(total.mean()), _stderr(total)))
    return ExperimentResult(rows, r_total, cfg.seed, cfg.fingerprint(), kind="sweep")


def run_protocol_experiment(cfg: ExperimentConfig, sched: FrameSchedule | None = None,
                            link: ControlLinkModel | None = None,
                            adc: AdcModel | None = DEFAULT_ADC,
                            keep_logs: bool = False):
    """The sweep realized through the frame protocol.

    Every (antenna set, frequency set) cell runs one frame per realization
    (a full TDMA round for multi-user configs) with joint selection at the
    receiver; the reported value is the delivery-phase dc power, so under
    ideal settings it must match :func:`run_sweep`'s joint value. Returns
    ``(ExperimentResult, logs)``; logs are kept only when requested.
    """
    sched = sched if sched is not None else FrameSchedule()
    link = link if link is not None else ControlLinkModel()
    cells = list(_sweep_cells(cfg))
    values = {(m, k): np.zeros((cfg.realizations, cfg.users)) for m, k, _ in cells}
    logs = []

    for r in range(cfg.realizations):
        chans = [sample_channel(cfg.profile, cfg.max_antennas,
                                substream(cfg.seed, DOMAIN_CHANNEL, r, u))
                 for u in range(cfg.users)]
        link_rng = substream(cfg.seed, DOMAIN_LINK, r)
        for m, k, cols in cells:
            subgrid = FrequencyGrid.from_frequencies(
                cfg.grid.frequencies_hz[cols], mode=f"subset:{cfg.grid.mode}")
            cell_sched = FrameSchedule(sched.slot_s, m * k, sched.wpt_s)
            if cfg.users == 1:
                log, _sel = run_frame(chans[0].subset(m), subgrid, cfg.budget,
                                      cfg.rect, sched=cell_sched, link=link,
                                      rng=link_rng, adc=adc,
                                      extra_loss_db=cfg.loss_for_user(0))
                values[(m, k)][r, 0] = log.applied_power_w
                if keep_logs:
                    logs.append(log)
            else:
                users = [UserState(user_id=u + 1, channel=chans[u].subset(m),
                                   rect=cfg.rect, extra_loss_db=cfg.loss_for_user(u))
                         for u in range(cfg.users)]
                res = run_tdma(users, cfg.users, subgrid, cfg.budget,
                               sched=cell_sched, link=link, rng=link_rng,
                               adc=adc, keep_logs=keep_logs)
                if keep_logs:
                    logs.extend(res.frame_logs)
                per_user = np.zeros(cfg.users)
                counts = np.zeros(cfg.users)
                for row in res.rows:
                    per_user[row.user_id - 1] += row.wpt_power_w
                    counts[row.user_id - 1] += 1
                values[(m, k)][r] = per_user / counts

    rows = []
    for m, k, _ in cells:
        arr = values[(m, k)]
        for u in range(cfg.users):
            rows.append(ResultRow(m, k, "joint", u + 1,
                                  float(arr[:, u].mean()), _stderr(arr[:, u])))
        if cfg.users > 1:
            total = arr.sum(axis=1)
            rows.append(ResultRow(m, k, "joint", SUM_USER,
                                  float(total.mean()), _stderr(total)))
    result = ExperimentResult(rows, cfg.realizations, cfg.seed, cfg.fingerprint(),
                              kind="protocol")
    return result, logs


@dataclass(frozen=True)
class TransmitterConsumption:
    """Transmitter-side draw, reported alongside the receiver budget."""

    pa_supply_w: float = 84.0  # 28 V rail at 3 A
    radio_power_w: float = 0.048
    soc_power_w: float = 2.6e-6

    @property
    def total_w(self) -> float:
        return self.pa_supply_w + self.radio_power_w + self.soc_power_w


def power_budget_report(train_avg_power_w: float = 3.9e-6,
                        wpt_avg_power_w: float = 20.4e-6,
                        sched: FrameSchedule | None = None,
                        consumption: ReceiverConsumption | None = None,
                        bytes_sent: int | None = None,
                        tx: TransmitterConsumption | None = None
                        ) -> tuple[EnergyBudget, str]:
    """Per-frame energy ledger from phase-average powers, plus a report."""
    if train_avg_power_w < 0 or wpt_avg_power_w < 0:
        raise ValidationError("phase powers must be >= 0")
    sched = sched if sched is not None else FrameSchedule()
    consumption = consumption if consumption is not None else ReceiverConsumption()
    tx = tx if tx is not None else TransmitterConsumption()
    if bytes_sent is None:
        bytes_sent = consumption.bytes_sent if consumption.bytes_sent is not None else 5
    e_train = sched.training_us * 1e-6 * train_avg_power_w
    e_wpt = sched.wpt_us * 1e-6 * wpt_avg_power_w
    b = energy_budget(e_train, e_wpt, sched.frame_s, consumption, bytes_sent)
    uj = 1e6
    lines = [
        f"frame      {b.frame_s:.6f} s ({sched.training_slots} x {sched.slot_s * 1e3:.3f} ms "
        f"training + {sched.wpt_s:.6f} s delivery)",
        f"harvested  {b.e_dc_j * uj:.3f} uJ (training {e_train * uj:.3f} uJ "
        f"+ delivery {e_wpt * uj:.3f} uJ)",
        f"controller {b.e_soc_j * uj:.3f} uJ ({consumption.soc_power_w * uj:.3f} uW "
        f"x {b.frame_s:.3f} s)",
        f"radio      {b.e_radio_j * uj:.3f} uJ ({b.bytes_sent} B @ "
        f"{consumption.radio_bitrate_bps / 1e3:.1f} kbps -> {b.t_radio_s * 1e3:.3f} ms "
        f"x {consumption.radio_power_w * 1e3:.1f} mW)",
        f"consumed   {b.e_consumed_j * uj:.3f} uJ",
        f"net        {b.e_net_j * uj:.3f} uJ",
        f"efficiency {b.efficiency * 100:.1f} %" if not math.isnan(b.efficiency)
        else "efficiency n/a (no harvest)",
        f"transmitter draw {tx.total_w:.6f} W (amplifier {tx.pa_supply_w:g} W "
        f"+ radio {tx.radio_power_w * 1e3:g} mW + controller {tx.soc_power_w * 1e6:g} uW)",
    ]
    return b, "\n".join(lines)
