"""System configuration, validation and shared result types."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``errors`` holds ``(field, rule)`` pairs, one per violation.
    """

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        msg = "; ".join(f"{name}: {rule}" for name, rule in self.errors)
        super().__init__(msg or "invalid configuration")


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def eta_from_carrier(carrier_hz: float) -> float:
    """Free-space reference gain (c / (4 pi f))**2 at 1 m."""
    if not carrier_hz > 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_hz!r}")
    return (SPEED_OF_LIGHT / (4.0 * math.pi * carrier_hz)) ** 2


@dataclass(frozen=True)
class SicMode:
    kind: str = "perfect"
    varpi: float = 0.0

    @classmethod
    def perfect(cls) -> SicMode:
        return cls("perfect", 0.0)

    @classmethod
    def imperfect(cls, varpi: float = 1.0) -> SicMode:
        return cls("imperfect", float(varpi))

    @property
    def is_perfect(self) -> bool:
        return self.kind == "perfect"

    @property
    def label(self) -> str:
        return "psic" if self.is_perfect else "ipsic"

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "varpi": self.varpi}

    @classmethod
    def from_json(cls, obj: Any) -> SicMode:
        if isinstance(obj, SicMode):
            return obj
        if isinstance(obj, str):
            if obj in ("perfect", "psic"):
                return cls.perfect()
            if obj in ("imperfect", "ipsic"):
                return cls.imperfect(1.0)
            raise ConfigError([("sic", f"unknown SIC mode {obj!r}")])
        if isinstance(obj, dict):
            unknown = set(obj) - {"kind", "varpi"}
            if unknown:
                raise ConfigError([("sic", f"unknown keys {sorted(unknown)}")])
            kind = obj.get("kind", "perfect")
            varpi = float(obj.get("varpi", 0.0 if kind == "perfect" else 1.0))
            return cls(kind, varpi)
        raise ConfigError([("sic", f"cannot interpret {obj!r}")])


class Scenario(str, Enum):
    EXTERNAL_N = "external-n"
    EXTERNAL_M = "external-m"
    EXTERNAL_PAIR = "external-pair"
    INTERNAL = "internal"

    @property
    def user(self) -> str:
        return {
            Scenario.EXTERNAL_N: "n",
            Scenario.EXTERNAL_M: "m",
            Scenario.EXTERNAL_PAIR: "pair",
            Scenario.INTERNAL: "m_to_n",
        }[self]

    def target_rate(self, cfg: SystemConfig) -> float:
        if self is Scenario.EXTERNAL_N:
            return cfg.R_n
        if self is Scenario.EXTERNAL_M:
            return cfg.R_m
        if self is Scenario.INTERNAL:
            return cfg.R_mn
        raise ValueError("pair scenario has two target rates (R_n, R_m)")


@dataclass(frozen=True)
class SystemConfig:
    """Physical and network parameters of one NOMA pair.

    Defaults reproduce the reference parameter set (1 GHz carrier, alpha = 2,
    a_n = 0.2, a_m = 0.8, R_D1 = 2 m, R_D2 = 10 m, 1000 m eavesdropper disc,
    0.01 BPCU target rates, U = 15) with rho_e = 10 dB, lambda_e = 1e-3 and a
    -30 dB total residual interference.

    ``eta`` left as ``None`` is derived from ``carrier_hz`` by
    :func:`validate_config`. Residual interference is given as the total
    expected power over the K subcarriers; the per-entry variance is that
    total divided by K.
    """

    K: int = 2
    a_n: float = 0.2
    a_m: float = 0.8
    rho_db: float = 30.0
    rho_e_db: float = 10.0
    carrier_hz: float = 1e9
    eta: float | None = None
    alpha: float = 2.0
    lambda_e: float = 1e-3
    r_d1: float = 2.0
    r_d2: float = 10.0
    r_eve: float = 1000.0
    sic: SicMode = field(default_factory=SicMode.perfect)
    residual_total_db: float = -30.0
    residual_total_eve_db: float = -30.0
    R_n: float = 0.01
    R_m: float = 0.01
    R_mn: float = 0.01
    U: int = 15
    M: int | None = None
    rel_tol: float = 1e-6

    # derived quantities
    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def rho(self) -> float:
        return db_to_linear(self.rho_db)

    @property
    def rho_e(self) -> float:
        return db_to_linear(self.rho_e_db)

    @property
    def eta_value(self) -> float:
        return self.eta if self.eta is not None else eta_from_carrier(self.carrier_hz)

    @property
    def omega_i(self) -> float:
        return db_to_linear(self.residual_total_db) / self.K

    @property
    def omega_ie(self) -> float:
        return db_to_linear(self.residual_total_eve_db) / self.K

    @property
    def varpi(self) -> float:
        return self.sic.varpi

    @property
    def scheme(self) -> str:
        return "pd" if self.K == 1 else "cd"

    def replace(self, **changes: Any) -> SystemConfig:
        if "sic" in changes:
            changes["sic"] = SicMode.from_json(changes["sic"])
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out["sic"] = self.sic.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> SystemConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - names)
        if unknown:
            raise ConfigError([(k, "unknown configuration key") for k in unknown])
        kwargs = dict(obj)
        if "sic" in kwargs:
            kwargs["sic"] = SicMode.from_json(kwargs["sic"])
        return cls(**kwargs)


CONFIG_FIELDS = tuple(f.name for f in dataclasses.fields(SystemConfig))


def load_config(path: str | Path) -> SystemConfig:
    with open(path) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ConfigError([("<root>", "config file must hold a JSON object")])
    return validate_config(SystemConfig.from_json(obj))


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every invariant and return ``cfg`` with ``eta`` resolved.

    All violations are collected before raising :class:`ConfigError`.
    Validation is idempotent.
    """
    errs: list[tuple[str, str]] = []

    def need(ok: bool, name: str, rule: str) -> None:
        if not ok:
            errs.append((name, rule))

    need(_is_int(cfg.K) and cfg.K >= 1, "K", "must be an integer >= 1")
    need(_is_int(cfg.U) and cfg.U >= 1, "U", "must be an integer >= 1")
    need(0 < cfg.a_n < 1, "a_n", "must lie in (0, 1)")
    need(0 < cfg.a_m < 1, "a_m", "must lie in (0, 1)")
    need(abs(cfg.a_n + cfg.a_m - 1.0) <= 1e-12, "a_n+a_m", "power coefficients must sum to 1")
    need(cfg.a_m > cfg.a_n, "a_m", "must exceed a_n")
    for name in ("rho_db", "rho_e_db", "residual_total_db", "residual_total_eve_db"):
        need(math.isfinite(getattr(cfg, name)), name, "must be finite")
    need(cfg.carrier_hz > 0, "carrier_hz", "must be positive")
    need(cfg.eta is None or cfg.eta > 0, "eta", "must be positive when given")
    need(cfg.alpha >= 2, "alpha", "path loss exponent must be >= 2 (delta = 2/alpha <= 1)")
    need(cfg.lambda_e >= 0 and math.isfinite(cfg.lambda_e), "lambda_e", "must be finite and >= 0")
    need(cfg.r_d1 >= 0, "r_d1", "must be >= 0")
    need(cfg.r_d2 > 0, "r_d2", "must be positive")
    need(cfg.r_eve > 0, "r_eve", "must be positive")
    need(cfg.r_d1 < cfg.r_d2 < cfg.r_eve, "r_d1<r_d2<r_eve", "radii must be strictly increasing")
    for name in ("R_n", "R_m", "R_mn"):
        need(getattr(cfg, name) >= 0, name, "target rate must be >= 0")
    need(0 < cfg.rel_tol < 1, "rel_tol", "must lie in (0, 1)")
    need(cfg.M is None or (_is_int(cfg.M) and cfg.M >= 2), "M", "must be an integer >= 2 when given")
    sic = cfg.sic
    if sic.kind == "perfect":
        need(sic.varpi == 0, "sic.varpi", "perfect SIC requires varpi = 0")
    elif sic.kind == "imperfect":
        need(0 < sic.varpi <= 1, "sic.varpi", "imperfect SIC requires varpi in (0, 1]")
    else:
        errs.append(("sic.kind", "must be 'perfect' or 'imperfect'"))
    if errs:
        raise ConfigError(errs)
    if cfg.eta is None:
        cfg = dataclasses.replace(cfg, eta=eta_from_carrier(cfg.carrier_hz))
    return cfg


@dataclass(frozen=True)
class SopEstimate:
    value: float
    method: str
    ci_half_width: float = 0.0
    iterations: int = 0
    notes: str = ""
    raw: float | None = None

    @classmethod
    def analytic(cls, raw: float, method: str, notes: str = "") -> SopEstimate:
        """Clamp a quadrature result into [0, 1], keeping the raw value."""
        value = min(max(raw, 0.0), 1.0)
        if value != raw:
            extra = f"raw={raw!r} clamped"
            notes = f"{notes}; {extra}" if notes else extra
        return cls(value=value, method=method, notes=notes, raw=raw)
