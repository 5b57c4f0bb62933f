"""Scenario files, synthetic channels, proportional fairness and SNR sweeps.

A scenario is a YAML mapping; see the README for the schema. Each
(SNR point, algorithm) pair runs its own sequence of scheduling intervals
with its own proportional-fair state; channel draws depend only on
``(seed, interval)`` so every SNR point and algorithm sees the same fading.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from . import __version__
from .constraints import ConstraintSystem, KnapsackSystem
from .errors import InvalidArgument, NumericError, SchedulingError
from .ground_set import ChannelSet, Codebook, GroundSet, UserProfile, build_ground_set
from .oracle import exact_schedule
from .rank import CappedRank, FiniteAlphabetRank, GaussianRank
from .scheduler import (data_dependent_upper_bound, greedy_schedule, lazy_greedy_schedule,
                        pruned_greedy_schedule)

ALGORITHMS = {
    "greedy": greedy_schedule,
    "lazy": lazy_greedy_schedule,
    "pruned": pruned_greedy_schedule,
    "exact": exact_schedule,
}
ALPHABETS = ("gaussian", "finite")
PF_THROUGHPUT_FLOOR = 1e-6

CHANNEL_MODEL = ("i.i.d. Rayleigh: H[u,n] entries CN(0,1) scaled by sqrt(snr*N); unit-variance noise; "
                 "a user spreading its power over all N RBs gets per-RB SNR snr times its power")
SPECTRAL_EFFICIENCY = "sum of scheduled (unweighted) rates in bits per N RBs, divided by N: bits per RB"


class ConfigError(InvalidArgument):
    pass


def generate_channels(seed, n_users: int, n_rbs: int, n_r: int, n_t: int, snr_linear: float) -> ChannelSet:
    """Seeded i.i.d. Rayleigh channels; ``seed`` may be an int or a sequence of ints."""
    if min(n_users, n_rbs, n_r, n_t) < 1:
        raise InvalidArgument("channel dimensions must be positive")
    if not snr_linear > 0:
        raise InvalidArgument(f"snr must be positive, got {snr_linear}")
    rng = np.random.default_rng(seed)
    shape = (n_users, n_rbs, n_r, n_t)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    return ChannelSet(math.sqrt(snr_linear * n_rbs) * g)


def update_pf_weights(throughput, served_rates, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """One proportional-fair step.

    ``T <- (1 - 1/tau) T + r / tau`` and ``alpha = 1 / max(T, 1e-6)``; the
    weights are rescaled to mean 1, which leaves every scheduling decision
    unchanged. Returns ``(new_throughput, weights)``.
    """
    if not tau > 1:
        raise InvalidArgument(f"PF time constant must exceed 1, got {tau}")
    t = np.asarray(throughput, dtype=float)
    r = np.asarray(served_rates, dtype=float)
    t_new = (1.0 - 1.0 / tau) * t + r / tau
    inv = 1.0 / np.maximum(t_new, PF_THROUGHPUT_FLOOR)
    return t_new, inv / inv.mean()


@dataclass(frozen=True)
class ResultRow:
    snr_db: float
    interval: int
    algorithm: str
    objective: float
    spectral_efficiency: float
    upper_bound: float | None
    ratio: float | None
    h_evaluations: int
    runtime_ms: float | None
    seed: int


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))


def _per_user(value, n_users: int, name: str, cast=float) -> list:
    if isinstance(value, (list, tuple)):
        if len(value) != n_users:
            raise ConfigError(f"{name}: expected {n_users} values, got {len(value)}")
        vals = list(value)
    else:
        vals = [value] * n_users
    try:
        return [cast(math.inf if str(v).lower() in ("inf", "infinity") else v) for v in vals]
    except (TypeError, ValueError, OverflowError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _matrix(spec) -> np.ndarray:
    if isinstance(spec, dict):
        re = np.asarray(spec.get("real", 0.0), dtype=float)
        im = np.asarray(spec.get("imag", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    return np.asarray(spec, dtype=float).astype(complex)


@dataclass
class Scenario:
    n_users: int
    n_rbs: int
    n_r: int
    n_t: int
    codebook: Any = "antenna-selection"
    power: Any = 1.0
    queue: Any = math.inf
    constellation: Any = 4
    constraints: dict = field(default_factory=dict)
    snr_db: list = field(default_factory=lambda: [10.0])
    intervals: int = 1
    seed: int = 0
    algorithms: list = field(default_factory=lambda: ["greedy"])
    alphabet: str = "gaussian"
    pf_tau: float = 100.0
    pf_initial_throughput: float = 1.0
    upper_bound: bool = True
    brute_force_cap: int = 16

    KEYS = {"users": "n_users", "rbs": "n_rbs", "rx_antennas": "n_r", "tx_antennas": "n_t"}

    @classmethod
    def from_dict(cls, raw: dict) -> "Scenario":
        if not isinstance(raw, dict):
            raise ConfigError("scenario must be a mapping")
        kwargs = {}
        known = {f.name for f in fields(cls)}
        for key, value in raw.items():
            name = cls.KEYS.get(key, key)
            if name not in known:
                raise ConfigError(f"unknown scenario key {key!r}")
            kwargs[name] = value
        missing = [k for k, v in cls.KEYS.items() if v not in kwargs]
        if missing:
            raise ConfigError(f"missing scenario keys: {', '.join(missing)}")
        if "algorithm" in raw:
            raise ConfigError("use 'algorithms' (a list)")
        sc = cls(**kwargs)
        sc.validate()
        return sc

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from None
        return cls.from_dict(raw)

    def validate(self) -> None:
        for name in ("n_users", "n_rbs", "n_r", "n_t", "intervals", "brute_force_cap"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if isinstance(self.snr_db, (int, float)):
            self.snr_db = [self.snr_db]
        try:
            self.snr_db = [float(s) for s in self.snr_db]
        except (TypeError, ValueError):
            raise ConfigError(f"snr_db must be numbers, got {self.snr_db!r}") from None
        if not self.snr_db:
            raise ConfigError("snr_db must not be empty")
        if isinstance(self.algorithms, str):
            self.algorithms = [self.algorithms]
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; choose from {sorted(ALGORITHMS)}")
        if self.alphabet not in ALPHABETS:
            raise ConfigError(f"alphabet must be one of {ALPHABETS}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not float(self.pf_tau) > 1:
            raise ConfigError("pf_tau must exceed 1")
        if not isinstance(self.constraints, dict):
            raise ConfigError("constraints must be a mapping")
        self.build_ground_set()

    def build_codebook(self) -> Codebook:
        try:
            if self.codebook == "antenna-selection":
                return Codebook.antenna_selection(self.n_t)
            if isinstance(self.codebook, list):
                return Codebook(tuple(_matrix(m) for m in self.codebook))
        except (InvalidArgument, TypeError, ValueError) as exc:
            raise ConfigError(f"codebook: {exc}") from None
        raise ConfigError(f"codebook must be 'antenna-selection' or a list of matrices, got {self.codebook!r}")

    def build_ground_set(self) -> GroundSet:
        k = self.n_users
        powers = _per_user(self.power, k, "power")
        queues = _per_user(self.queue, k, "queue")
        consts = _per_user(self.constellation, k, "constellation", int)
        codebook = self.build_codebook()
        try:
            profiles = [UserProfile(1.0, q, p, s, self.n_t) for p, q, s in zip(powers, queues, consts)]
            return build_ground_set(k, codebook, self.n_rbs, profiles)
        except InvalidArgument as exc:
            raise ConfigError(str(exc)) from None

    def build_knapsacks(self, ground: GroundSet) -> KnapsackSystem:
        """Control and interference rows from the ``constraints`` section."""
        spec = dict(self.constraints)
        n = len(ground)
        rows, caps, intf = [], [], []

        def users_mask(users):
            mask = np.zeros(n, dtype=bool)
            for u in users:
                if not 0 <= int(u) < ground.n_users:
                    raise ConfigError(f"user {u} out of range")
                mask[ground.user_elements(int(u))] = True
            return mask

        try:
            m = spec.pop("max_scheduled_users", None)
            if m is not None:
                rows.append(np.ones(n, dtype=np.int64))
                caps.append(int(m))
            for region in spec.pop("control_regions", []) or []:
                rows.append(users_mask(region["users"]).astype(np.int64))
                caps.append(int(region.get("capacity", 1)))
            for row in spec.pop("control_rows", []) or []:
                rows.append(np.asarray(row["row"], dtype=np.int64))
                caps.append(int(row.get("capacity", 1)))
            for row in spec.pop("interference", []) or []:
                if "row" in row:
                    intf.append(np.asarray(row["row"], dtype=float))
                else:
                    intf.append(users_mask(row["users"]) * float(row["coefficient"]))
            max_sparsity = spec.pop("max_control_sparsity", None)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"constraints: malformed entry ({exc})") from None
        if spec:
            raise ConfigError(f"unknown constraint keys: {', '.join(spec)}")
        try:
            control = np.array(rows, dtype=np.int64).reshape(len(rows), n)
            interference = np.array(intf, dtype=float).reshape(len(intf), n)
            return KnapsackSystem(control, interference, control_capacity=caps or None, max_sparsity=max_sparsity)
        except (InvalidArgument, ValueError) as exc:
            raise ConfigError(f"constraints: {exc}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in list(out.items()):
            if isinstance(v, float) and math.isinf(v):
                out[k] = "inf"
        return out


def _capped_rank(ground, channels, alphabet, cap):
    gaussian = GaussianRank(ground, channels)
    base = gaussian if alphabet == "gaussian" else FiniteAlphabetRank(gaussian, cap)
    return CappedRank(base, ground.queues(), cap)


def run_experiment(scenario: Scenario, *, algorithms: Sequence[str] | None = None, alphabet: str | None = None,
                   snr_db: Sequence[float] | None = None, timing: bool = False) -> list[ResultRow]:
    """Run every (SNR point, algorithm, interval) and return the sorted rows."""
    algorithms = list(algorithms or scenario.algorithms)
    alphabet = alphabet or scenario.alphabet
    ground = scenario.build_ground_set()
    constraints = ConstraintSystem(ground, scenario.build_knapsacks(ground))
    rows = []
    for snr in (scenario.snr_db if snr_db is None else snr_db):
        try:
            snr_lin = 10.0 ** (float(snr) / 10.0)
        except OverflowError:
            raise NumericError(f"snr {snr} dB overflows") from None
        for algo in algorithms:
            schedule = ALGORITHMS[algo]
            throughput = np.full(ground.n_users, float(scenario.pf_initial_throughput))
            _, user_weights = update_pf_weights(throughput, throughput, 2.0)
            for t in range(scenario.intervals):
                try:
                    channels = generate_channels((scenario.seed, t), ground.n_users, ground.n_rbs,
                                                 scenario.n_r, scenario.n_t, snr_lin)
                    rank = _capped_rank(ground, channels, alphabet, scenario.brute_force_cap)
                    weights = ground.element_values(user_weights)
                    start = time.perf_counter()
                    outcome = schedule(ground, weights, rank, constraints)
                    elapsed = (time.perf_counter() - start) * 1e3
                    bound = None
                    if scenario.upper_bound:
                        bound = data_dependent_upper_bound(ground, weights, rank, constraints, outcome.trace)
                except SchedulingError as exc:
                    raise type(exc)(f"snr {snr} dB, interval {t}, {algo}: {exc}") from exc
                served = np.zeros(ground.n_users)
                for e, r in outcome.rates.items():
                    served[ground.user[e]] += r
                rows.append(ResultRow(
                    snr_db=float(snr),
                    interval=t,
                    algorithm=algo,
                    objective=outcome.objective,
                    spectral_efficiency=outcome.sum_rate / ground.n_rbs,
                    upper_bound=bound,
                    ratio=(outcome.objective / bound) if bound else None,
                    h_evaluations=outcome.evaluations,
                    runtime_ms=elapsed if timing else None,
                    seed=scenario.seed,
                ))
                throughput, user_weights = update_pf_weights(throughput, served, scenario.pf_tau)
    rows.sort(key=lambda r: (r.snr_db, r.algorithm, r.interval))
    return rows


def metadata(scenario: Scenario, alphabet: str | None = None) -> dict:
    return {
        "package": f"ulmimo {__version__}",
        "channel_model": CHANNEL_MODEL,
        "spectral_efficiency": SPECTRAL_EFFICIENCY,
        "objective": "PF-weighted sum rate h(S), bits per N RBs, weights normalized to mean 1",
        "upper_bound": "min over greedy prefixes S of h(S) + top per-user positive marginals",
        "rb_unit": "one RB is the atomic allocation unit; subcarriers per RB are not modeled",
        "alphabet": alphabet or scenario.alphabet,
        "scenario": scenario.to_dict(),
    }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def format_rows(rows: Sequence[ResultRow], fmt: str = "csv", meta: dict | None = None) -> str:
    if fmt == "json":
        doc = {"metadata": meta or {}, "columns": list(RESULT_COLUMNS),
               "rows": [[None if getattr(r, c) is None else
                         (float(_fmt(getattr(r, c))) if isinstance(getattr(r, c), float) else getattr(r, c))
                         for c in RESULT_COLUMNS] for r in rows]}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if fmt != "csv":
        raise InvalidArgument(f"unknown output format {fmt!r}")
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        text = json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else str(value)
        buf.write(f"# {key}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in rows:
        writer.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])
    return buf.getvalue()


def read_csv_rows(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def summarize(rows: Sequence[ResultRow]) -> dict:
    """Per (algorithm, SNR) averages of spectral efficiency and bound ratio."""
    out: dict = {}
    for r in rows:
        out.setdefault((r.algorithm, r.snr_db), []).append(r)
    summary = {}
    for key, group in sorted(out.items()):
        ratios = [g.ratio for g in group if g.ratio is not None]
        summary[key] = {
            "spectral_efficiency": float(np.mean([g.spectral_efficiency for g in group])),
            "ratio": float(np.mean(ratios)) if ratios else None,
            "intervals": len(group),
        }
    return summary
