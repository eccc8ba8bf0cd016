"""Scenario configuration: strict JSON schema with command-line overrides."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import MISSING, asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Optional, Union, get_args, get_origin, get_type_hints

from .dynsys import IntegratorConfig
from .errors import ConfigError
from .kepler import (
    KeplerModel,
    OrbitalElements,
    PhaseState,
    elements_from_state,
    orbital_period,
    state_from_elements,
)


@dataclass
class ElementsSection:
    sma: float
    ecc: float
    inc: float
    raan: float
    argp: float
    m0: float
    epoch: float = 0.0


@dataclass
class StateSection:
    q: list
    p: list
    t: float = 0.0


@dataclass
class ThirdBodySection:
    mu: float = 1.0
    radius: float = 5.0
    phase: float = 0.0


@dataclass
class PerturbationSection:
    kind: str = "none"  # none | inverse_square | rotating_dipole | third_body
    epsilon: float = 0.0
    omega: float = 0.0
    third_body: ThirdBodySection = field(default_factory=ThirdBodySection)


@dataclass
class SpanSection:
    t0: float = 0.0
    t1: Optional[float] = None
    periods: Optional[float] = None  # alternative to t1, in unperturbed periods
    samples: int = 100


@dataclass
class IntegratorSection:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    initial_step: Optional[float] = None


@dataclass
class FdSection:
    chart_step: float = 1e-7
    flow_step: float = 1e-6


@dataclass
class BracketsSection:
    t: float = 0.0
    t_other: Optional[float] = None


@dataclass
class OutputSection:
    path: Optional[str] = None
    elements_path: Optional[str] = None
    reconstructed_path: Optional[str] = None
    direct_path: Optional[str] = None


@dataclass
class ScenarioConfig:
    mu: float = 1.0
    elements: Optional[ElementsSection] = None
    state: Optional[StateSection] = None
    perturbation: PerturbationSection = field(default_factory=PerturbationSection)
    span: SpanSection = field(default_factory=SpanSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    fd: FdSection = field(default_factory=FdSection)
    brackets: BracketsSection = field(default_factory=BracketsSection)
    output: OutputSection = field(default_factory=OutputSection)

    # -- derived objects -------------------------------------------------

    @property
    def model(self) -> KeplerModel:
        return KeplerModel(self.mu)

    @property
    def integrator_config(self) -> IntegratorConfig:
        i = self.integrator
        return IntegratorConfig(i.rel_tol, i.abs_tol, i.max_steps, i.initial_step)

    def require_initial(self, path: str = "elements") -> None:
        if self.elements is None and self.state is None:
            raise ConfigError(f"missing required key: {path} (or state)")

    def initial_elements(self) -> OrbitalElements:
        """Initial condition as elements with epoch ``span.t0`` (used by element charts)."""
        self.require_initial()
        if self.elements is not None:
            e = self.elements
            el = OrbitalElements(e.sma, e.ecc, e.inc, e.raan, e.argp, e.m0, e.epoch)
            if el.epoch == self.span.t0:
                return el
            return elements_from_state(state_from_elements(el, self.model, self.span.t0), self.model)
        return elements_from_state(self.initial_state(), self.model, epoch=self.span.t0, strict=True)

    def initial_state(self) -> PhaseState:
        self.require_initial()
        if self.state is not None:
            s = self.state
            st = PhaseState(s.t, s.q, s.p)
            if s.t != self.span.t0:
                raise ConfigError("state.t must equal span.t0")
            return st
        e = self.elements
        el = OrbitalElements(e.sma, e.ecc, e.inc, e.raan, e.argp, e.m0, e.epoch)
        return state_from_elements(el, self.model, self.span.t0)

    def end_time(self) -> float:
        if self.span.t1 is not None:
            return self.span.t1
        if self.span.periods is not None:
            el = elements_from_state(self.initial_state(), self.model)
            return self.span.t0 + self.span.periods * orbital_period(el, self.model)
        raise ConfigError("missing required key: span.t1 (or span.periods)")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Hash of the scenario; output paths are excluded so reruns elsewhere match."""
        data = self.to_dict()
        data.pop("output")
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_KINDS = ("none", "inverse_square", "rotating_dipole", "third_body")


def _strip_optional(tp):
    if get_origin(tp) is Union:
        args = [a for a in get_args(tp) if a is not type(None)]
        return args[0], True
    return tp, False


def _coerce(value: Any, tp, path: str):
    tp, optional = _strip_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{path} may not be null")
    if is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{path} must be an object")
        return _build(tp, value, path)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number")
        if not math.isfinite(value):
            raise ConfigError(f"{path} must be finite")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string")
        return value
    if tp is list:
        if not isinstance(value, list) or len(value) != 3:
            raise ConfigError(f"{path} must be a list of 3 numbers")
        return [_coerce(v, float, f"{path}[{i}]") for i, v in enumerate(value)]
    raise ConfigError(f"{path}: unsupported type")


def _build(cls, data: dict, prefix: str = ""):
    hints = get_type_hints(cls)
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key: {prefix + '.' if prefix else ''}{key}")
    kwargs = {}
    for name, f in known.items():
        path = f"{prefix}.{name}" if prefix else name
        if name in data:
            kwargs[name] = _coerce(data[name], hints[name], path)
        elif f.default is MISSING and f.default_factory is MISSING:
            raise ConfigError(f"missing required key: {path}")
    return cls(**kwargs)


def _validate(cfg: ScenarioConfig) -> None:
    def check(ok, msg):
        if not ok:
            raise ConfigError(msg)

    check(cfg.mu > 0, "mu must be positive")
    if cfg.elements is not None:
        e = cfg.elements
        check(e.sma > 0, "elements.sma must be positive")
        check(0 <= e.ecc < 1, "elements.ecc must lie in [0, 1)")
        check(0 <= e.inc <= math.pi, "elements.inc must lie in [0, pi]")
    if cfg.elements is not None and cfg.state is not None:
        raise ConfigError("give either elements or state, not both")
    pert = cfg.perturbation
    check(pert.kind in _KINDS, f"perturbation.kind must be one of {_KINDS}")
    check(cfg.span.samples >= 2, "span.samples must be >= 2")
    check(cfg.span.t1 is None or cfg.span.periods is None, "give span.t1 or span.periods, not both")
    i = cfg.integrator
    check(i.rel_tol > 0 and i.abs_tol > 0, "integrator tolerances must be positive")
    check(i.max_steps >= 1, "integrator.max_steps must be >= 1")
    check(cfg.fd.chart_step > 0 and cfg.fd.flow_step > 0, "fd steps must be positive")
    tb = pert.third_body
    check(tb.radius > 0 and tb.mu > 0, "perturbation.third_body radius and mu must be positive")


def set_dotted(data: dict, dotted: str, value: Any) -> None:
    """Set ``data['a']['b'] = value`` for ``dotted == 'a.b'``, creating levels."""
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: {k} is not an object")
    node[keys[-1]] = value


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Read a JSON scenario, apply dotted-key overrides, validate.

    Precedence is override > file > default.
    """
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
    for dotted, value in (overrides or {}).items():
        set_dotted(data, dotted, value)
    cfg = _build(ScenarioConfig, data)
    _validate(cfg)
    return cfg
