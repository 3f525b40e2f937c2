"""Simulation configuration and the flat ``key = value`` config file format.

Example::

    # defaults apply to every key left out
    rounds = 800
    max_sleep = auto
    segment_probs = 1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.55

``segment_probs`` also accepts the presets ``monotone`` (the default above)
and ``inner-0.1`` (segment 1 lowered to 0.1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from dataclasses import field as _field
from pathlib import Path

from .coverage_planner import DEFAULT_DUTY_FRACTION, DEFAULT_TARGET_COVERAGE, plan_coverage
from .deployment import INITIAL_ENERGY_J, FieldConfig
from .errors import ConfigurationError
from .protocol_engine import SEGMENT_PRESETS, DEFAULT_SEGMENT_PROBS, Protocol, ProtocolPolicy
from .radio_energy import BITS_PER_BYTE, RadioParams


@dataclass(frozen=True)
class SimulationConfig:
    field: FieldConfig = _field(default_factory=FieldConfig)
    n_nodes: int = 150
    initial_energy: float = INITIAL_ENERGY_J
    rounds: int = 800
    radio: RadioParams = _field(default_factory=RadioParams)
    policy: ProtocolPolicy = _field(default_factory=ProtocolPolicy)
    grid_spacing: float = 5.0
    seeds: tuple[int, ...] = (1,)
    # off: nodes never spend energy (used to observe pure election behavior)
    consume_energy: bool = True

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ConfigurationError(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not self.initial_energy > 0:
            raise ConfigurationError(f"initial_energy_j must be positive, got {self.initial_energy}")
        if self.rounds < 0:
            raise ConfigurationError(f"rounds must be >= 0, got {self.rounds}")
        if not self.grid_spacing > 0:
            raise ConfigurationError(f"grid_spacing_m must be positive, got {self.grid_spacing}")

    def with_protocol(self, kind: Protocol | str) -> SimulationConfig:
        return replace(self, policy=replace(self.policy, kind=Protocol(kind)))


def _float(v: str) -> float:
    return float(v)


def _int(v: str) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


def _float_list(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _segment_probs(v: str) -> tuple[float, ...]:
    preset = SEGMENT_PRESETS.get(v.strip().lower())
    return preset if preset is not None else _float_list(v)


def _int_list(v: str) -> tuple[int, ...]:
    return tuple(_int(x) for x in v.replace(",", " ").split())


def _max_sleep(v: str):
    return "auto" if v.strip().lower() == "auto" else _int(v)


# key -> (parser, default); unit conversions happen in build_config
KEYS = {
    "n_nodes": (_int, 150),
    "x_min": (_float, 0.0),
    "y_min": (_float, 0.0),
    "x_max": (_float, 100.0),
    "y_max": (_float, 100.0),
    "bs_x": (_float, 50.0),
    "bs_y": (_float, 50.0),
    "sensing_range_m": (_float, 10.0),
    "radio_range_m": (_float, 10.0),
    "initial_energy_j": (_float, INITIAL_ENERGY_J),
    "rounds": (_int, 800),
    "e_elec_nj_per_bit": (_float, 50.0),
    "eps_fs_pj": (_float, 10.0),
    "eps_mp_pj": (_float, 0.0013),
    "d0_m": (_float, 87.7),
    "e_da_nj_per_bit": (_float, 5.0),
    "packet_bytes": (_int, 500),
    "protocol": (str, "leach"),
    "p_leach": (_float, 0.1),
    "segments": (_int, None),
    "segment_probs": (_segment_probs, None),
    "d_max_m": (_float, 3.5),
    "max_sleep": (_max_sleep, "auto"),
    "target_coverage": (_float, DEFAULT_TARGET_COVERAGE),
    "duty_fraction": (_float, DEFAULT_DUTY_FRACTION),
    "frames_per_round": (_int, 1),
    "grid_spacing_m": (_float, 5.0),
    "seeds": (_int_list, (1,)),
    "consume_energy": (_bool, True),
}

DEFAULT_SEGMENTS = 10

# config key -> dataclass attribute named in validation messages
ATTRIBUTE_OF_KEY = {
    "bs_x": "bs_position",
    "bs_y": "bs_position",
    "sensing_range_m": "sensing_range",
    "radio_range_m": "radio_range",
    "e_elec_nj_per_bit": "e_elec",
    "eps_fs_pj": "eps_fs",
    "eps_mp_pj": "eps_mp",
    "d0_m": "d0",
    "e_da_nj_per_bit": "e_da",
    "packet_bytes": "packet_bits",
    "d_max_m": "d_max",
    "initial_energy_j": "initial_energy",
    "grid_spacing_m": "grid_spacing",
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {lines[key]})")
        parser = KEYS[key][0]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        lines[key] = lineno
    values["_lines"] = lines
    return values


def build_config(values: dict, source: str = "<config>") -> SimulationConfig:
    lines = values.get("_lines", {})
    v = {k: d for k, (_, d) in KEYS.items()}
    v.update({k: x for k, x in values.items() if k != "_lines"})

    def where(*keys: str) -> str:
        for k in keys:
            if k in lines:
                return f"{source}:{lines[k]}: "
        return f"{source}: "

    probs = v["segment_probs"]
    k = v["segments"]
    if probs is None:
        if k is not None and k != DEFAULT_SEGMENTS:
            raise ConfigurationError(f"{where('segments')}segments={k} requires explicit segment_probs")
        probs = DEFAULT_SEGMENT_PROBS
    elif k is not None and k != len(probs):
        raise ConfigurationError(
            f"{where('segments', 'segment_probs')}segments={k} but segment_probs has {len(probs)} values"
        )

    def guarded(keys: tuple[str, ...], build):
        try:
            return build()
        except ConfigurationError as exc:
            msg = str(exc)
            culprit = [k for k in keys if ATTRIBUTE_OF_KEY.get(k, k) in msg]
            raise ConfigurationError(f"{where(*(culprit or keys))}{' / '.join(culprit or keys)}: {msg}") from None

    fld = guarded(
        ("x_min", "y_min", "x_max", "y_max", "bs_x", "bs_y", "sensing_range_m", "radio_range_m"),
        lambda: FieldConfig(
            x_min=v["x_min"],
            y_min=v["y_min"],
            x_max=v["x_max"],
            y_max=v["y_max"],
            bs_position=(v["bs_x"], v["bs_y"]),
            sensing_range=v["sensing_range_m"],
            radio_range=v["radio_range_m"],
        ),
    )
    radio = guarded(
        ("e_elec_nj_per_bit", "eps_fs_pj", "eps_mp_pj", "d0_m", "e_da_nj_per_bit", "packet_bytes"),
        lambda: RadioParams(
            e_elec=v["e_elec_nj_per_bit"] / 1e9,
            eps_fs=v["eps_fs_pj"] / 1e12,
            eps_mp=v["eps_mp_pj"] / 1e12,
            d0=v["d0_m"],
            e_da=v["e_da_nj_per_bit"] / 1e9,
            packet_bits=v["packet_bytes"] * BITS_PER_BYTE,
        ),
    )

    max_sleep = v["max_sleep"]
    if max_sleep == "auto":
        try:
            max_sleep = plan_coverage(
                v["n_nodes"], fld.area, v["target_coverage"], fld.sensing_range, v["duty_fraction"]
            ).max_sleep
        except ValueError as exc:
            raise ConfigurationError(f"{where('max_sleep', 'target_coverage', 'duty_fraction')}max_sleep=auto: {exc}") from None

    try:
        kind = Protocol(v["protocol"])
    except ValueError:
        raise ConfigurationError(f"{where('protocol')}protocol must be 'leach' or 'proposed', got {v['protocol']!r}") from None

    policy = guarded(
        ("d_max_m", "p_leach", "segment_probs", "max_sleep", "frames_per_round"),
        lambda: ProtocolPolicy(
            kind=kind,
            p_leach=v["p_leach"],
            segment_probs=probs,
            d_max=v["d_max_m"],
            max_sleep=max_sleep,
            frames_per_round=v["frames_per_round"],
        ),
    )
    if not v["seeds"]:
        raise ConfigurationError(f"{where('seeds')}seeds must not be empty")
    return guarded(
        ("n_nodes", "initial_energy_j", "rounds", "grid_spacing_m"),
        lambda: SimulationConfig(
            field=fld,
            n_nodes=v["n_nodes"],
            initial_energy=v["initial_energy_j"],
            rounds=v["rounds"],
            radio=radio,
            policy=policy,
            grid_spacing=v["grid_spacing_m"],
            seeds=tuple(v["seeds"]),
            consume_energy=v["consume_energy"],
        ),
    )


def load_config(path: str | Path | None = None) -> SimulationConfig:
    """Read and validate a config file; ``None`` gives the built-in defaults."""
    if path is None:
        return build_config({})
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid UTF-8 ({exc})") from None
    return build_config(parse_config_text(text, str(path)), str(path))
