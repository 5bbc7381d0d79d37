import enum
import json
import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml
from parsimonious.exceptions import ParseError
from parsimonious.expressions import Compound
from parsimonious.grammar import Grammar
from parsimonious.nodes import NodeVisitor
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.exception import UsageError

logger = logging.getLogger(__name__)

CONFIG_LINE_GRAMMAR = Grammar(r"""
    line    = _ entry? _ comment?
    entry   = key _ "=" _ value
    key     = ~r"[A-Za-z_][A-Za-z0-9_\-]*"
    value   = ~r"[^#]*[^#\s]" / ""
    comment = "#" ~r".*"
    _       = ~r"[ \t]*"
""")


class _LineVisitor(NodeVisitor):
    """Returns (key, value) for an entry line, None for blank and comment lines."""

    def generic_visit(self, node, visited_children):
        return visited_children if isinstance(node.expr, Compound) else node

    def visit_line(self, node, visited_children):
        _, entry, _, _ = visited_children
        return entry[0] if entry else None

    def visit_entry(self, node, visited_children):
        key, _, _, _, value = visited_children
        return key, value

    def visit_key(self, node, visited_children):
        return node.text

    def visit_value(self, node, visited_children):
        return node.text


def normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse UTF-8 ``key = value`` lines with '#' comments; later keys win."""
    values: dict[str, str] = {}
    visitor = _LineVisitor()
    for number, line in enumerate(text.splitlines(), start=1):
        try:
            entry = visitor.visit(CONFIG_LINE_GRAMMAR.parse(line))
        except ParseError as e:
            raise UsageError(f"{source}:{number}: malformed config line at column {e.pos + 1}: {line!r}") from None
        if entry is not None:
            key, value = entry
            values[normalize_key(key)] = value
    return values


class Command(str, enum.Enum):
    BRACKET = "bracket"
    QUANTIZE = "quantize"
    EVOLVE = "evolve"
    LIMIT_SCAN = "limit-scan"
    RESONANCE = "resonance"


class HamiltonianKind(str, enum.Enum):
    HO = "ho"
    FORCED = "forced"


class ConfigManager:
    """配置管理器"""
    DEFAULT_CONFIGS = {
        'h': {'value': '1', 'description': 'Planck constant', 'config_type': 'number'},
        'm': {'value': '1', 'description': '质量 m', 'config_type': 'number'},
        'omega': {'value': '1', 'description': '频率 ω', 'config_type': 'number'},
        'grid_n': {'value': '256', 'description': 'grid points per axis (power of two)', 'config_type': 'number'},
        'grid_L': {'value': 'null', 'description': 'grid half-width; null picks the default grid',
                   'config_type': 'json'},
        'hamiltonian': {'value': 'ho', 'description': 'ho or forced', 'config_type': 'string'},
        't0': {'value': '0', 'description': '起始时间', 'config_type': 'number'},
        't1': {'value': '1', 'description': '结束时间', 'config_type': 'number'},
        'dt': {'value': '0.1', 'description': 'trajectory sampling interval', 'config_type': 'number'},
        'max_step': {'value': '0.001', 'description': 'largest internal RK4 step', 'config_type': 'number'},
        'closed_form': {'value': 'false', 'description': 'use the closed-form flow instead of RK4',
                        'config_type': 'boolean'},
        'degree_cap': {'value': '8', 'description': 'largest (q,p)-degree the bracket ODE may reach',
                       'config_type': 'number'},
        'Z0': {'value': '0', 'description': 'force amplitude', 'config_type': 'number'},
        'Omega': {'value': '1', 'description': 'force frequency', 'config_type': 'number'},
        'q0': {'value': '0', 'description': 'coherent state centre q', 'config_type': 'number'},
        'p0': {'value': '0', 'description': 'coherent state centre p', 'config_type': 'number'},
        'h_list': {'value': '1,0.5,0.25', 'description': 'comma-separated h values for limit scans',
                   'config_type': 'string'},
        't_max': {'value': '100', 'description': 'resonance time horizon', 'config_type': 'number'},
        'samples': {'value': '1000', 'description': 'resonance sample count', 'config_type': 'number'},
        'workers': {'value': 'null', 'description': 'sweep threads; null lets the executor decide',
                    'config_type': 'json'},
    }

    def __init__(self, values: Optional[Mapping[str, Any]] = None):
        self._values: dict[str, Any] = {key: data['value'] for key, data in self.DEFAULT_CONFIGS.items()}
        if values:
            self.update(values)

    @staticmethod
    def cast(value: Any, config_type: str) -> Any:
        if not isinstance(value, str):
            return value
        if config_type == 'number':
            text = value.strip()
            return float(text) if any(c in text for c in '.eE') or text.lower() in ('inf', 'nan') else int(text)
        elif config_type == 'boolean':
            return value.strip().lower() in ('true', '1', 'yes', 'on')
        elif config_type == 'json':
            return json.loads(value)
        else:
            return value

    def get_config(self, key: str, default: Any = None) -> Any:
        """获取配置值"""
        key = normalize_key(key)
        if key not in self._values:
            return default
        config_type = self.DEFAULT_CONFIGS.get(key, {}).get('config_type', 'string')
        try:
            return self.cast(self._values[key], config_type)
        except ValueError as e:
            raise UsageError(f"config value for {key!r} is not a valid {config_type}: {self._values[key]!r}") from e

    def set_config(self, key: str, value: Any):
        """设置配置值"""
        self._values[normalize_key(key)] = value

    def update(self, values: Mapping[str, Any]):
        for key, value in values.items():
            self.set_config(key, value)

    def get_all_configs(self) -> dict[str, Any]:
        """获取所有配置"""
        return {key: self.get_config(key) for key in self._values}

    def load_file(self, path: Union[str, Path]) -> "ConfigManager":
        """Read a key=value file, or YAML when the suffix is .yaml/.yml."""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise UsageError(f"cannot read config file {path}: {e}") from e
        if path.suffix.lower() in ('.yaml', '.yml'):
            try:
                data = yaml.safe_load(text)
            except yaml.YAMLError as e:
                raise UsageError(f"invalid YAML in {path}: {e}") from e
            if data is None:
                data = {}
            if not isinstance(data, dict):
                raise UsageError(f"YAML config {path} must be a mapping")
        else:
            data = parse_config_text(text, str(path))
        logger.info(f"loaded {len(data)} config values from {path}")
        self.update(data)
        return self

    def run_config(self, command: Union[Command, str], overrides: Optional[Mapping[str, Any]] = None) -> "RunConfig":
        """defaults < file < command-line overrides, validated as a RunConfig."""
        if overrides:
            self.update({k: v for k, v in overrides.items() if v is not None})
        values = self.get_all_configs()
        values['command'] = Command(command)
        return RunConfig.model_validate(values)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    f: Optional[str] = None
    g: Optional[str] = None
    symbol: Optional[str] = None
    h: float = Field(default=1.0, ge=0)
    m: float = Field(default=1.0, gt=0)
    omega: float = Field(default=1.0, gt=0)
    grid_n: int = 256
    grid_L: Optional[float] = Field(default=None, gt=0)
    out: Optional[str] = None
    hamiltonian: HamiltonianKind = HamiltonianKind.HO
    t0: float = 0.0
    t1: float = 1.0
    dt: float = Field(default=0.1, gt=0)
    max_step: float = Field(default=1e-3, gt=0)
    closed_form: bool = False
    degree_cap: int = Field(default=8, ge=0)
    Z0: float = Field(default=0.0, ge=0)
    Omega: float = Field(default=1.0, gt=0)
    q0: float = 0.0
    p0: float = 0.0
    h_list: list[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25])
    t_max: float = Field(default=100.0, gt=0)
    samples: int = Field(default=1000, ge=2)
    plot_out: Optional[str] = None
    workers: Optional[int] = Field(default=None, ge=1)
    verbose: bool = False

    @field_validator('grid_n')
    @classmethod
    def validate_grid_n(cls, v: int) -> int:
        if v < 64 or not _is_power_of_two(v):
            raise ValueError(f"grid_n must be a power of two >= 64, got {v}")
        return v

    @field_validator('h_list', mode='before')
    @classmethod
    def split_h_list(cls, v):
        if isinstance(v, str):
            return [float(x) for x in v.replace(' ', '').strip('[]').split(',') if x]
        if isinstance(v, (int, float)):
            return [v]
        return v

    @field_validator('h_list')
    @classmethod
    def validate_h_list(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("h_list must not be empty")
        if any(h < 0 for h in v):
            raise ValueError("h values must be non-negative")
        if any(h == 0 for h in v[:-1]):
            raise ValueError("h = 0 is only allowed as the final scan row")
        return v

    @model_validator(mode='after')
    def validate_time_span(self) -> "RunConfig":
        if self.command is Command.EVOLVE and not self.t1 > self.t0:
            raise ValueError(f"t1 must be greater than t0, got [{self.t0}, {self.t1}]")
        return self


__all__ = [
    'ConfigManager', 'RunConfig', 'Command', 'HamiltonianKind', 'CONFIG_LINE_GRAMMAR',
    'parse_config_text', 'normalize_key',
]
