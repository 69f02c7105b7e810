"""Sweep scenarios: figure presets and the INI-style config format.

A config file has three sections (plus an optional ``[scenario]`` header
naming a preset to start from)::

    [scenario]
    preset = fig4            ; optional, keys below override it

    [topology]
    k_sd = 3
    k_sr = 4
    k_rd = 4
    omega_sd = 3
    omega_sr = 6
    omega_rd = 6
    omega_interpretation = mean_power   ; or: squared

    [sweep]
    a2_grid = 0.1, 0.2, 0.3
    rho_db_grid = 20
    schemes = onoma, cnoma, eq15

    [engine]
    engines = analytic, mc
    samples = 1000000
    seed = 0
    chunk_size = 100000
    max_terms = 200
    rel_tol = 1e-10
    quad_order = 400
"""

from __future__ import annotations

import configparser
import dataclasses
import enum
import os
from dataclasses import dataclass, field

import numpy as np

from .analytic import SeriesControl
from .channel import Topology
from .errors import ParseError, ValidationError
from .montecarlo import McConfig, Scheme

__all__ = [
    "Engine",
    "OmegaInterpretation",
    "Scenario",
    "PRESETS",
    "preset",
    "parse_scenario",
]


class Engine(enum.Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "mc"

    @classmethod
    def parse(cls, text: str) -> "Engine":
        key = text.strip().lower()
        if key in ("mc", "montecarlo", "monte_carlo"):
            return cls.MONTE_CARLO
        if key == "analytic":
            return cls.ANALYTIC
        raise ValueError(f"unknown engine {text!r}")


class OmegaInterpretation(enum.Enum):
    MEAN_POWER = "mean_power"
    SQUARED = "squared"


@dataclass(frozen=True)
class Scenario:
    k_sd: float = 3.0
    k_sr: float = 4.0
    k_rd: float = 4.0
    omega_sd: float = 3.0
    omega_sr: float = 6.0
    omega_rd: float = 6.0
    a2_grid: tuple = (0.1,)
    rho_db_grid: tuple = (20.0,)
    schemes: tuple = (Scheme.ONOMA, Scheme.CNOMA, Scheme.PAPER_SUM_EQ15)
    engines: tuple = (Engine.ANALYTIC, Engine.MONTE_CARLO)
    series: SeriesControl = field(default_factory=SeriesControl)
    mc: McConfig = field(default_factory=McConfig)
    omega_interpretation: OmegaInterpretation = OmegaInterpretation.MEAN_POWER
    name: str = "custom"

    def __post_init__(self):
        for key in ("k_sd", "k_sr", "k_rd"):
            if not getattr(self, key) >= 0:
                raise ValidationError(f"{key} must be >= 0")
        for key in ("omega_sd", "omega_sr", "omega_rd"):
            if not getattr(self, key) > 0:
                raise ValidationError(f"{key} must be > 0")
        for key in ("a2_grid", "rho_db_grid", "schemes", "engines"):
            if len(getattr(self, key)) == 0:
                raise ValidationError(f"{key} must not be empty")
        bad = [a for a in self.a2_grid if not 0.0 < a < 0.5]
        if bad:
            raise ValidationError(f"a2 values must lie in (0, 0.5): {bad}")
        if not all(np.isfinite(self.rho_db_grid)):
            raise ValidationError("rho_db_grid must be finite")

    @property
    def topology(self) -> Topology:
        return Topology.from_params(
            self.k_sd,
            self.omega_sd,
            self.k_sr,
            self.omega_sr,
            self.k_rd,
            self.omega_rd,
            squared=self.omega_interpretation is OmegaInterpretation.SQUARED,
        )

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


def _a2_steps():
    return tuple(round(0.1 + 0.05 * i, 2) for i in range(7))


PRESETS = {
    "fig4": Scenario(a2_grid=_a2_steps(), rho_db_grid=(20.0,), name="fig4"),
    "fig8": Scenario(a2_grid=(0.1,), rho_db_grid=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0), name="fig8"),
    "fig9": Scenario(omega_sr=12.0, omega_rd=12.0, a2_grid=_a2_steps(), rho_db_grid=(30.0,), name="fig9"),
    "fig10": Scenario(
        omega_sr=12.0, omega_rd=12.0, a2_grid=(0.1,), rho_db_grid=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0), name="fig10"
    ),
}


def preset(name: str) -> Scenario:
    try:
        return PRESETS[name.strip().lower()]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


_FLOAT_KEYS = {
    "topology": ("k_sd", "k_sr", "k_rd", "omega_sd", "omega_sr", "omega_rd"),
}
_ALLOWED = {
    "scenario": {"preset", "name"},
    "topology": {"k_sd", "k_sr", "k_rd", "omega_sd", "omega_sr", "omega_rd", "omega_interpretation"},
    "sweep": {"a2_grid", "rho_db_grid", "schemes"},
    "engine": {"engines", "samples", "seed", "chunk_size", "max_terms", "rel_tol", "quad_order"},
}


def _floats(text, key):
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise ParseError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def _number(text, key, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise ParseError(f"{key}: expected {kind.__name__}, got {text!r}") from None


def _parse_text(text: str) -> Scenario:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None

    for section in parser.sections():
        if section not in _ALLOWED:
            raise ValidationError(f"unknown section [{section}]")
        unknown = set(parser[section]) - _ALLOWED[section]
        if unknown:
            raise ValidationError(f"unknown keys in [{section}]: {sorted(unknown)}")

    base = Scenario()
    if parser.has_option("scenario", "preset"):
        base = preset(parser["scenario"]["preset"])
    changes = {}
    if parser.has_option("scenario", "name"):
        changes["name"] = parser["scenario"]["name"]

    if parser.has_section("topology"):
        sec = parser["topology"]
        for key in _FLOAT_KEYS["topology"]:
            if key in sec:
                changes[key] = _number(sec[key], key)
        if "omega_interpretation" in sec:
            try:
                changes["omega_interpretation"] = OmegaInterpretation(sec["omega_interpretation"].strip().lower())
            except ValueError:
                raise ValidationError(f"omega_interpretation must be mean_power or squared") from None

    if parser.has_section("sweep"):
        sec = parser["sweep"]
        if "a2_grid" in sec:
            changes["a2_grid"] = _floats(sec["a2_grid"], "a2_grid")
        if "rho_db_grid" in sec:
            changes["rho_db_grid"] = _floats(sec["rho_db_grid"], "rho_db_grid")
        if "schemes" in sec:
            try:
                changes["schemes"] = tuple(Scheme.parse(s) for s in sec["schemes"].split(",") if s.strip())
            except ValueError as exc:
                raise ValidationError(str(exc)) from None

    if parser.has_section("engine"):
        sec = parser["engine"]
        if "engines" in sec:
            try:
                changes["engines"] = tuple(Engine.parse(s) for s in sec["engines"].split(",") if s.strip())
            except ValueError as exc:
                raise ValidationError(str(exc)) from None
        mc = base.mc
        mc_changes = {}
        for key, attr in (("samples", "n_samples"), ("seed", "seed"), ("chunk_size", "chunk_size")):
            if key in sec:
                mc_changes[attr] = _number(sec[key], key, int)
        series_changes = {}
        for key, kind in (("max_terms", int), ("rel_tol", float), ("quad_order", int)):
            if key in sec:
                series_changes[key] = _number(sec[key], key, kind)
        try:
            if mc_changes:
                changes["mc"] = dataclasses.replace(mc, **mc_changes)
            if series_changes:
                changes["series"] = dataclasses.replace(base.series, **series_changes)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None

    return base.replace(**changes)


def parse_scenario(source) -> Scenario:
    """Build a :class:`Scenario` from a preset name, a config path or config text."""
    if isinstance(source, os.PathLike):
        source = os.fspath(source)
    text = str(source)
    if text.strip().lower() in PRESETS:
        return preset(text)
    if "\n" not in text and os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    elif "[" not in text:
        raise ParseError(f"{source!r} is neither a preset, an existing file nor config text")
    return _parse_text(text)
