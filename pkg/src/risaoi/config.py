"""Key-value configuration files.

One ``key = value`` per line, ``#`` starts a comment, keys are
case-insensitive. Physical quantities may carry a unit suffix and are
converted once, here, to linear SI units:

* power: ``W``, ``mW``, ``dBm`` (``noise``, ``Q``, ``P0``)
* ratio: ``dB`` or a bare linear number (``gamma_th``, ``A0``)
* distance: ``m`` or a bare number (``d0``, ``d_bi``, ...)

Omitted keys take the defaults listed in ``DEFAULTS``. Serialization writes
linear values with ``repr`` precision so that load/dump/load is exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import BaselineKind
from .channel import PathLossParams
from .sim import ScenarioConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


# key -> (kind, target); kind selects the unit parser
_SCENARIO = {
    "n_t": ("int", "n_t"),
    "n_s": ("int", "n_s"),
    "u_i": ("int", "u_i"),
    "u_e": ("int", "u_e"),
    "m": ("int", "m"),
    "noise": ("power", "noise"),
    "gamma_th": ("ratio", "gamma_th"),
    "q": ("power", "energy_threshold"),
    "p0": ("power", "power_budget"),
    "lambda": ("floats", "arrival_prob"),
    "t": ("int", "horizon"),
    "r": ("int", "repetitions"),
    "policy": ("policy", "policy"),
    "seed": ("int", "seed"),
    "relay_antennas": ("int", "relay_antennas"),
    "relay_share": ("float", "relay_share"),
    "workers": ("int", "workers"),
}
_PATHLOSS = {
    "a0": ("ratio", "reference_loss"),
    "d0": ("distance", "reference_distance"),
    "n_bi": ("float", "n_bi"),
    "n_ri": ("float", "n_ri"),
    "n_bj": ("float", "n_bj"),
    "n_rj": ("float", "n_rj"),
    "n_br": ("float", "n_br"),
    "d_bi": ("distance", "d_bi"),
    "d_bj": ("distance", "d_bj"),
    "d_br": ("distance", "d_br"),
    "d_ri": ("distance", "d_ri"),
    "d_rj": ("distance", "d_rj"),
}
_SCA = {
    "c0": ("float", "penalty_init"),
    "mu": ("float", "penalty_growth"),
    "t_pen": ("int", "penalty_rounds"),
    "eps1": ("float", "eps1"),
    "eps2": ("float", "eps2"),
    "eps_ao": ("float", "eps_ao"),
    "s1": ("int", "s1"),
    "s2": ("int", "s2"),
    "s_a": ("int", "s_a"),
    "early_exit": ("bool", "early_exit"),
    "solver": ("solver", "method"),
    "solver_tol": ("float", "solver_tol"),
}
KEYS = {**_SCENARIO, **_PATHLOSS, **_SCA}

# defaults differing from the dataclass defaults are none; listed for reference
DEFAULTS = {
    "N_t": "4",
    "N_s": "40",
    "U_I": "3",
    "U_E": "3",
    "M": "2",
    "lambda": "0.6",
    "noise": "-70 dBm",
    "gamma_th": "40 dB",
    "Q": "-10 dBm",
    "P0": "3 W",
    "A0": "-30 dB",
    "n_bi = n_bj = n_ri = n_rj": "2.2",
    "n_br": "3.5",
    "d_bi": "31 m",
    "d_bj": "3 m",
    "d_br": "3 m",
}

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_UNIT_RE = re.compile(rf"^\s*({_NUM})\s*([A-Za-z]*)\s*$")


def _number(key, text):
    m = _UNIT_RE.match(text)
    if not m:
        raise ConfigError(key, f"cannot parse {text!r} as a number with optional unit")
    return float(m.group(1)), m.group(2)


def parse_power(key: str, text: str) -> float:
    v, unit = _number(key, text)
    u = unit.lower()
    if u in ("", "w"):
        return v
    if u == "mw":
        return v * 1e-3
    if u == "dbm":
        return 10 ** (v / 10) * 1e-3
    raise ConfigError(key, f"unit {unit!r} is not a power unit (W, mW, dBm)")


def parse_ratio(key: str, text: str) -> float:
    v, unit = _number(key, text)
    u = unit.lower()
    if u == "":
        return v
    if u == "db":
        return 10 ** (v / 10)
    raise ConfigError(key, f"unit {unit!r} is not a ratio unit (dB or none)")


def parse_distance(key: str, text: str) -> float:
    v, unit = _number(key, text)
    if unit.lower() in ("", "m"):
        return v
    raise ConfigError(key, f"unit {unit!r} is not a distance unit (m)")


def _convert(key: str, kind: str, text: str):
    if kind == "power":
        return parse_power(key, text)
    if kind == "ratio":
        return parse_ratio(key, text)
    if kind == "distance":
        return parse_distance(key, text)
    if kind == "int":
        v, unit = _number(key, text)
        if unit or v != int(v):
            raise ConfigError(key, f"expected an integer, got {text!r}")
        return int(v)
    if kind == "float":
        v, unit = _number(key, text)
        if unit:
            raise ConfigError(key, f"unexpected unit {unit!r}")
        return v
    if kind == "floats":
        vals = [_convert(key, "float", part) for part in text.split(",")]
        return vals[0] if len(vals) == 1 else tuple(vals)
    if kind == "bool":
        t = text.strip().lower()
        if t in ("true", "yes", "1", "on"):
            return True
        if t in ("false", "no", "0", "off"):
            return False
        raise ConfigError(key, f"expected a boolean, got {text!r}")
    if kind == "policy":
        try:
            return BaselineKind.parse(text)
        except ValueError as e:
            raise ConfigError(key, str(e)) from None
    if kind == "solver":
        t = text.strip().lower()
        if t not in ("ipm", "admm"):
            raise ConfigError(key, f"solver must be ipm or admm, got {text!r}")
        return t
    raise AssertionError(kind)


def parse_lines(text: str, source: str = "<string>") -> dict[str, str]:
    """Split a config text into ``{lowercase key: raw value}``; duplicate keys are an error."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"{source}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        k = key.lower()
        if k in out:
            raise ConfigError(key, f"{source}: duplicate key")
        out[k] = value
    return out


def config_from_mapping(items: dict[str, str], base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a validated config from raw ``{key: value}`` text entries."""
    base = base or ScenarioConfig()
    scen, pl, sca = {}, {}, {}
    for key, text in items.items():
        k = key.lower()
        if k not in KEYS:
            raise ConfigError(_display(k), "unknown key")
        kind, target = KEYS[k]
        value = _convert(_display(k), kind, text)
        if k in _SCENARIO:
            scen[target] = value
        elif k in _PATHLOSS:
            pl[target] = value
        else:
            sca[target] = value
    key_of = {target: key for key, (_, target) in KEYS.items()}
    try:
        pathloss = replace(base.pathloss, **pl)
    except ValueError as e:
        raise ConfigError(_guess_key(str(e), pl, key_of), str(e)) from None
    try:
        sca_cfg = replace(base.sca, **sca)
    except ValueError as e:
        raise ConfigError(_guess_key(str(e), sca, key_of), str(e)) from None
    try:
        return replace(base, pathloss=pathloss, sca=sca_cfg, **scen)
    except ValueError as e:
        raise ConfigError(_guess_key(str(e), scen, key_of), str(e)) from None


def _guess_key(msg: str, given: dict, key_of: dict) -> str:
    """Map a validation message (which starts with the field name) to the user-facing key."""
    m = re.match(r"\w+", msg)
    if m and m.group(0) in key_of:
        return _display(key_of[m.group(0)])
    return ", ".join(_display(key_of[t]) for t in given) or "config"


_DISPLAY = {"n_t": "N_t", "n_s": "N_s", "u_i": "U_I", "u_e": "U_E", "m": "M", "q": "Q", "p0": "P0", "a0": "A0", "t": "T", "r": "R", "s_a": "S_A", "s1": "S1", "s2": "S2", "c0": "C0"}


def _display(key: str) -> str:
    return _DISPLAY.get(key, key)


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("path", f"config file {str(p)!r} not found")
    return loads(p.read_text(), source=str(p))


def loads(text: str, source: str = "<string>") -> ScenarioConfig:
    return config_from_mapping(parse_lines(text, source))


def dumps(config: ScenarioConfig) -> str:
    """Serialize with linear SI values; ``loads(dumps(c)) == c``."""
    lines = []
    for key, (kind, target) in KEYS.items():
        if key in _SCENARIO:
            v = getattr(config, target)
        elif key in _PATHLOSS:
            v = getattr(config.pathloss, target)
        else:
            v = getattr(config.sca, target)
        if v is None:
            continue
        name = _display(key)
        if kind == "power":
            lines.append(f"{name} = {float(v)!r} W")
        elif kind == "distance":
            lines.append(f"{name} = {float(v)!r} m")
        elif kind == "floats":
            vals = np.atleast_1d(np.asarray(v, dtype=float))
            lines.append(f"{name} = " + ", ".join(repr(float(x)) for x in vals))
        elif kind == "policy":
            lines.append(f"{name} = {v.value}")
        elif kind in ("bool", "solver"):
            lines.append(f"{name} = {str(v).lower()}")
        elif kind == "int":
            lines.append(f"{name} = {int(v)}")
        else:
            lines.append(f"{name} = {float(v)!r}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- sweeps

SWEEPABLE = {"gamma_th": "ratio", "p0": "power", "n_s": "int", "q": "power", "d_br": "distance"}


@dataclass
class SweepSpec:
    param: str  # display name of the swept key
    values: list[str]  # raw value texts, units included
    base: ScenarioConfig
    policies: list[BaselineKind] = field(default_factory=lambda: [BaselineKind.PROPOSED])
    out: str | None = None

    def __post_init__(self):
        if self.param.lower() not in SWEEPABLE:
            raise ConfigError("sweep", f"cannot sweep {self.param!r}; choose from {sorted(SWEEPABLE)}")
        if not self.values:
            raise ConfigError("values", "the value list is empty")
        if not self.policies:
            raise ConfigError("policies", "the policy list is empty")

    def numeric_values(self) -> list[float]:
        """Values as written, without their unit (the CSV ``value`` column)."""
        return [_number("values", v)[0] for v in self.values]

    def configs(self) -> list[tuple[BaselineKind, float, ScenarioConfig]]:
        """One config per (policy, value), in policy-major order."""
        out = []
        key = self.param.lower()
        for pol in self.policies:
            for raw, num in zip(self.values, self.numeric_values()):
                cfg = config_from_mapping({key: raw, "policy": pol.value}, base=self.base)
                out.append((pol, num, cfg))
        return out


def load_sweep(path) -> SweepSpec:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("path", f"sweep spec {str(p)!r} not found")
    return sweep_loads(p.read_text(), source=str(p))


def sweep_loads(text: str, source: str = "<string>") -> SweepSpec:
    items = parse_lines(text, source)
    if "sweep" not in items:
        raise ConfigError("sweep", "missing swept parameter")
    param = items.pop("sweep").strip()
    values = [v.strip() for v in items.pop("values", "").split(",") if v.strip()]
    policies_txt = items.pop("policies", "proposed")
    out = items.pop("out", None)
    policies = []
    for tag in policies_txt.split(","):
        try:
            policies.append(BaselineKind.parse(tag))
        except ValueError as e:
            raise ConfigError("policies", str(e)) from None
    base = config_from_mapping(items)
    key = param.lower()
    if key not in SWEEPABLE:
        raise ConfigError("sweep", f"cannot sweep {param!r}; choose from {sorted(SWEEPABLE)}")
    for v in values:  # validate each value early, naming the key
        _convert(param, SWEEPABLE[key], v)
    return SweepSpec(param=param, values=values, base=base, policies=policies, out=out)


__all__ = [
    "ConfigError",
    "DEFAULTS",
    "KEYS",
    "PathLossParams",
    "SweepSpec",
    "dumps",
    "load_config",
    "load_sweep",
    "loads",
    "parse_distance",
    "parse_power",
    "parse_ratio",
    "sweep_loads",
]
