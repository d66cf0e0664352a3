"""JSON run configuration for the command-line runner.

Every block is validated before any work starts; unknown keys are errors.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .eos import ConfigError, EosModel

TASKS = ("profile", "classify", "sweep", "verify", "crosscheck")
FORMATS = ("json", "csv")


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _num(block, key, default, where, positive=False, allow_none=False, integer=False):
    val = block.get(key, default)
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if not math.isfinite(val) and not (val == math.inf and allow_none):
        raise ConfigError(f"{where}.{key} must be finite")
    if positive and not val > 0:
        raise ConfigError(f"{where}.{key} must be positive")
    if integer:
        if int(val) != val:
            raise ConfigError(f"{where}.{key} must be an integer")
        return int(val)
    return float(val)


@dataclass(frozen=True)
class Detonation:
    mach: float | None = None
    overdrive: float | None = None
    half_reaction_length: float | None = None

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("mach", "overdrive", "half_reaction_length"), "detonation")
        mach = _num(d, "mach", None, "detonation", positive=True, allow_none=True)
        od = _num(d, "overdrive", None, "detonation", positive=True, allow_none=True)
        if (mach is None) == (od is None):
            raise ConfigError("detonation needs exactly one of mach or overdrive")
        if mach is not None and not mach > 1:
            raise ConfigError("detonation.mach must exceed 1")
        hl = _num(d, "half_reaction_length", None, "detonation", positive=True, allow_none=True)
        return cls(mach, od, hl)


@dataclass(frozen=True)
class Domain:
    tol_eq: float = 1e-10
    rtol: float = 1e-13
    oracle_tol: float = 1e-9

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("tol_eq", "rtol", "oracle_tol"), "domain")
        vals = {k: _num(d, k, getattr(cls, k), "domain", positive=True)
                for k in ("tol_eq", "rtol", "oracle_tol")}
        if vals["tol_eq"] >= 1:
            raise ConfigError("domain.tol_eq must be below 1")
        return cls(**vals)


@dataclass(frozen=True)
class Frequencies:
    zeta_i: tuple = ()
    im_nu: float = 0.0
    R_bound: float | None = None
    eps_min: float = 0.0
    eps_max: float = 200.0

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("zeta_i", "im_nu", "R_bound", "eps_min", "eps_max"), "frequencies")
        grid = d.get("zeta_i")
        if grid is None:
            raise ConfigError("frequencies.zeta_i is required")
        if isinstance(grid, dict):
            _check_keys(grid, ("start", "stop", "num"), "frequencies.zeta_i")
            a = _num(grid, "start", None, "frequencies.zeta_i", positive=True)
            b = _num(grid, "stop", None, "frequencies.zeta_i", positive=True)
            n = _num(grid, "num", None, "frequencies.zeta_i", positive=True, integer=True)
            if b < a:
                raise ConfigError("frequencies.zeta_i.stop must not be below start")
            vals = tuple(float(z) for z in np.linspace(a, b, n))
        elif isinstance(grid, list):
            if not grid:
                raise ConfigError("frequencies.zeta_i must not be empty")
            vals = tuple(_num({"z": z}, "z", None, "frequencies.zeta_i", positive=True)
                         for z in grid)
        else:
            raise ConfigError("frequencies.zeta_i must be a list or {start, stop, num}")
        im_nu = _num(d, "im_nu", 0.0, "frequencies")
        R = _num(d, "R_bound", None, "frequencies", positive=True, allow_none=True)
        e0 = _num(d, "eps_min", 0.0, "frequencies")
        e1 = _num(d, "eps_max", 200.0, "frequencies", positive=True)
        if e0 < 0 or e1 <= e0:
            raise ConfigError("need 0 <= eps_min < eps_max")
        return cls(vals, im_nu, R, e0, e1)


@dataclass(frozen=True)
class Verify:
    zeta_i: float | None = None
    delta: float = 0.05
    periods: int = 3
    control_offset: float = 0.5
    exact: bool = True
    exact_eps_max: float = 120.0

    @classmethod
    def from_dict(cls, d):
        keys = ("zeta_i", "delta", "periods", "control_offset", "exact", "exact_eps_max")
        _check_keys(d, keys, "verify")
        z = _num(d, "zeta_i", None, "verify", positive=True, allow_none=True)
        delta = _num(d, "delta", 0.05, "verify", positive=True)
        periods = _num(d, "periods", 3, "verify", positive=True, integer=True)
        co = _num(d, "control_offset", 0.5, "verify", positive=True)
        ex = d.get("exact", True)
        if not isinstance(ex, bool):
            raise ConfigError("verify.exact must be true or false")
        em = _num(d, "exact_eps_max", 120.0, "verify", positive=True)
        if co <= 2 * delta:
            raise ConfigError("verify.control_offset must exceed twice verify.delta")
        return cls(z, delta, periods, co, ex, em)


@dataclass(frozen=True)
class Output:
    directory: str = "out"
    formats: tuple = ("json",)

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, ("directory", "formats"), "output")
        directory = d.get("directory", "out")
        if not isinstance(directory, str) or not directory:
            raise ConfigError("output.directory must be a non-empty string")
        fm = d.get("formats", ["json"])
        if isinstance(fm, str):
            fm = [fm]
        if not isinstance(fm, list) or not fm or any(f not in FORMATS for f in fm):
            raise ConfigError(f"output.formats must be a non-empty subset of {FORMATS}")
        return cls(directory, tuple(dict.fromkeys(fm)))


@dataclass(frozen=True)
class RunConfig:
    model: EosModel
    detonation: Detonation
    domain: Domain = field(default_factory=Domain)
    frequencies: Frequencies | None = None
    verify: Verify = field(default_factory=Verify)
    tasks: tuple = ("profile",)
    output: Output = field(default_factory=Output)

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        _check_keys(d, ("model", "detonation", "domain", "frequencies", "verify", "tasks",
                        "output"), "config")
        if "model" not in d or "detonation" not in d:
            raise ConfigError("config needs model and detonation blocks")
        if not isinstance(d["model"], dict):
            raise ConfigError("model must be an object")
        model = EosModel.from_dict(d["model"])
        det = Detonation.from_dict(d["detonation"])
        dom = Domain.from_dict(d.get("domain", {}))
        fr = Frequencies.from_dict(d["frequencies"]) if "frequencies" in d else None
        ver = Verify.from_dict(d.get("verify", {}))
        tasks = d.get("tasks", ["profile"])
        if not isinstance(tasks, list) or not tasks or any(t not in TASKS for t in tasks):
            raise ConfigError(f"tasks must be a non-empty subset of {TASKS}")
        out = Output.from_dict(d.get("output", {}))
        return cls(model, det, dom, fr, ver, tuple(dict.fromkeys(tasks)), out)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        return d

    def need_frequencies(self):
        if self.frequencies is None:
            raise ConfigError("this command needs a frequencies block")
        return self.frequencies
