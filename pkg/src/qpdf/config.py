"""Run configuration: flat ``key = value`` files plus command-line overrides.

Lines starting with ``#`` are comments. Lists are comma separated and
``auto`` selects a computed default for optional numbers.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .chemistry import PsrParams
from .errors import ConfigError
from .history_state import MAX_TOTAL_QUBITS
from .moments.measure import MomentEncoding
from .qlsa import HhlConfig

SOLVERS = ("classical", "ideal", "hhl")


@dataclass
class RunConfig:
    # reactor
    rate_prefactor: float = 15.0
    phi_a: float = 1.8
    phi_i: float = 0.15
    mixing_rate: float = 0.25
    # discretization
    n_t_qubits: int = 4
    n_phi_qubits: int = 5
    dt: float = 0.5
    horizon: float | None = None
    beta_a: float = 8.0
    beta_b: float = 8.0
    # solver
    solver: str = "ideal"
    hhl_clock_qubits: int = 8
    hhl_t0: float | None = None
    hhl_c: float | None = None
    # measurement
    orders: list[int] = field(default_factory=lambda: [2, 4, 6])
    moment_encoding: str = "centered"
    encoding_scale: float = 0.25
    fit_against: str = "index"
    shots: int = 0
    # gate-count tables
    gate_count_n_max: int = 20
    compiled_tally_n_max: int = 8
    # output
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        expected = self.dt * (2 ** self.n_t_qubits - 1)
        if self.horizon is None:
            self.horizon = expected
        elif abs(self.horizon - expected) > 1e-12 * max(1.0, expected):
            raise ConfigError(f"horizon {self.horizon} != dt * (2**n_t_qubits - 1) = {expected}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if not 1 <= self.n_phi_qubits <= 12 or self.n_t_qubits < 0:
            raise ConfigError("qubit counts out of range")
        if self.n_t_qubits + self.n_phi_qubits > MAX_TOTAL_QUBITS:
            raise ConfigError(f"n_t_qubits + n_phi_qubits must be <= {MAX_TOTAL_QUBITS}")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if any(m < 0 or m > 2 ** self.n_phi_qubits - 1 for m in self.orders):
            raise ConfigError("orders must lie in [0, 2**n_phi_qubits - 1]")
        if self.fit_against not in ("index", "phi"):
            raise ConfigError("fit_against must be 'index' or 'phi'")
        if not 1 <= self.gate_count_n_max <= 30:
            raise ConfigError("gate_count_n_max must be in [1, 30]")
        if not 1 <= self.compiled_tally_n_max <= 8:
            raise ConfigError("compiled_tally_n_max must be in [1, 8]")
        try:
            self.psr_params()
            self.hhl_config()
            self.encoding()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def n_steps(self) -> int:
        return 2 ** self.n_t_qubits - 1

    def psr_params(self) -> PsrParams:
        return PsrParams(self.rate_prefactor, self.phi_a, self.phi_i, self.mixing_rate)

    def hhl_config(self) -> HhlConfig:
        return HhlConfig(self.hhl_clock_qubits, self.hhl_t0, self.hhl_c, self.shots)

    def encoding(self) -> MomentEncoding:
        return MomentEncoding(self.moment_encoding, self.encoding_scale)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = "auto"
            elif isinstance(v, list):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(name: str, raw: str) -> Any:
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key {name!r}")
    typ = str(_FIELDS[name].type)
    raw = raw.strip()
    try:
        if typ.startswith("list"):
            return [int(t) for t in raw.split(",") if t.strip()]
        if "None" in typ and raw.lower() in ("auto", "none", ""):
            return None
        if typ.startswith("int"):
            return int(raw)
        if typ.startswith("float"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict[str, Any]:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return {k: _convert(k, v) for k, v in cp["run"].items()}


def parse_overrides(items) -> dict[str, Any]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = _convert(k.strip(), v)
    return out


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    values: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text))
    overrides = dict(overrides or {})
    if ("dt" in overrides or "n_t_qubits" in overrides) and "horizon" not in overrides:
        values.pop("horizon", None)
    values.update(overrides)
    return RunConfig(**values)
