"""Ideal polytropic gas with a single A -> B Arrhenius reaction.

All functions accept numpy arrays (real or complex) and broadcast.  Complex
arguments are allowed so that the steady profile can be continued off the
real axis; the positivity checks are only applied to real input.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping

import numpy as np


class EosDomainError(ValueError):
    """Raised for states outside the physical domain (v <= 0, T underflow)."""


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration blocks."""


@dataclass(frozen=True)
class EosModel:
    gamma: float = 1.2
    q: float = 5.0
    E_act: float = 5.0
    k_rate: float = 1.0
    R_gas: float = 1.0
    S_ref: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ConfigError(f"gamma must exceed 1, got {self.gamma}")
        if not self.k_rate > 0.0:
            raise ConfigError(f"k_rate must be positive, got {self.k_rate}")
        if not self.R_gas > 0.0:
            raise ConfigError(f"R_gas must be positive, got {self.R_gas}")
        if self.q < 0.0 or self.E_act < 0.0:
            raise ConfigError("q and E_act must be non-negative")
        for f in fields(self):
            if not np.isfinite(getattr(self, f.name)):
                raise ConfigError(f"{f.name} is not finite")

    @property
    def c_v(self) -> float:
        return self.R_gas / (self.gamma - 1.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EosModel":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown EOS keys: {sorted(unknown)}")
        vals = {}
        for k, val in d.items():
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"EOS key {k!r} must be a number")
            vals[k] = float(val)
        return cls(**vals)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EosModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ThermoBundle:
    p: np.ndarray
    T: np.ndarray
    c0_sq: np.ndarray
    p_v: np.ndarray
    p_S: np.ndarray
    p_lambda: np.ndarray
    sigma: np.ndarray
    deltaF: np.ndarray
    e: np.ndarray


@dataclass(frozen=True)
class RateBundle:
    r: np.ndarray
    r_v: np.ndarray
    r_S: np.ndarray
    r_lambda: np.ndarray


@dataclass(frozen=True)
class SourceBundle:
    Phi: np.ndarray
    Phi_v: np.ndarray
    Phi_S: np.ndarray
    Phi_lambda: np.ndarray


def _check_real_domain(v, T=None):
    v = np.asarray(v)
    if not np.iscomplexobj(v) and np.any(v <= 0):
        raise EosDomainError("specific volume must be positive")
    if T is not None:
        T = np.asarray(T)
        if not np.iscomplexobj(T) and np.any(~(T > np.finfo(float).tiny)):
            raise EosDomainError("temperature underflow")


def temperature(v, S, model: EosModel):
    """T = exp((S - S_ref)/c_v) v^{-(gamma-1)}."""
    v = np.asarray(v)
    S = np.asarray(S)
    return np.exp((S - model.S_ref) / model.c_v) * v ** (-(model.gamma - 1.0))


def entropy_from_vT(v, T, model: EosModel):
    return model.S_ref + model.c_v * np.log(T) + model.R_gas * np.log(v)


def eos_eval(v, S, lam, model: EosModel) -> ThermoBundle:
    v = np.asarray(v)
    lam = np.asarray(lam)
    _check_real_domain(v)
    T = temperature(v, S, model)
    _check_real_domain(v, T)
    p = model.R_gas * T / v
    p_v = -model.gamma * p / v
    c0_sq = -(v**2) * p_v
    p_S = p / model.c_v
    p_lam = np.zeros_like(p)
    # sigma = v (dp/dlam)_{e,v} / c0^2 with p = (gamma-1)(e - q lam)/v
    sigma = -model.q * (model.gamma - 1.0) / c0_sq
    dF = np.full_like(p, model.q)
    e = model.c_v * T + model.q * lam
    return ThermoBundle(p, T, c0_sq, p_v, p_S, p_lam, sigma, dF, e)


def rate_eval(v, S, lam, model: EosModel) -> RateBundle:
    """Arrhenius rate r = -k lam exp(-E/(R T)) and its partials."""
    v = np.asarray(v)
    lam = np.asarray(lam)
    _check_real_domain(v)
    T = temperature(v, S, model)
    _check_real_domain(v, T)
    ex = np.exp(-model.E_act / (model.R_gas * T))
    r = -model.k_rate * lam * ex
    r_T = r * model.E_act / (model.R_gas * T**2)
    T_v = -(model.gamma - 1.0) * T / v
    T_S = T / model.c_v
    r_lam = -model.k_rate * ex
    return RateBundle(r, r_T * T_v, r_T * T_S, r_lam)


def entropy_source(v, S, lam, model: EosModel) -> SourceBundle:
    """Phi = -r dF / T with dF = q."""
    th = eos_eval(v, S, lam, model)
    rb = rate_eval(v, S, lam, model)
    T = th.T
    T_v = -(model.gamma - 1.0) * T / np.asarray(v)
    T_S = T / model.c_v
    q = model.q
    Phi = -rb.r * q / T
    # d(-q r / T) = -q (r_x T - r T_x) / T^2
    Phi_v = -q * (rb.r_v * T - rb.r * T_v) / T**2
    Phi_S = -q * (rb.r_S * T - rb.r * T_S) / T**2
    Phi_lam = -q * rb.r_lambda / T
    return SourceBundle(Phi, Phi_v, Phi_S, Phi_lam)
