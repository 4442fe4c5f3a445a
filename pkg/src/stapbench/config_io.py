"""Plain-text configuration: scene parameters plus an experiment description.

Format: flat ``key = value`` lines for the scene, repeated ``[jammer]``
sections, an optional ``[target]`` section and an optional ``[experiment]``
section. ``#`` starts a comment. An empty file yields the standard scene
(450 MHz / 300 Hz / 75 m/s / 8x8 / CNR 40 dB, two 40 dB jammers) and the
default experiment. Unknown keys are rejected by name; parse errors carry
line numbers.
"""

from dataclasses import dataclass, fields

from . import scene

__all__ = ["ConfigError", "ExperimentSpec", "parse_config", "parse_config_text", "serialize_config"]

EXPERIMENT_KINDS = ("sinr-vs-snapshots", "sinr-vs-doppler", "pd-vs-snr", "complexity")

DEFAULT_ALGORITHMS = (
    "optimal",
    "smi",
    "lr-evd",
    "lr-krylov",
    "lr-jio",
    "lr-jidf",
    "sa-mvdr",
    "ka-mvdr",
)


class ConfigError(ValueError):
    """Configuration problem; the message names the offending key or line."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Which experiment to run and with what protocol parameters."""

    kind: str = "sinr-vs-snapshots"
    algorithms: tuple = DEFAULT_ALGORITHMS
    runs: int = 10
    trials: int = 100000
    designs: int = 20
    k_max: int = 800
    k_grid: tuple | None = None
    k_train: int | None = None  # None -> per-kind default (100 doppler, 200 pd)
    snr_grid_db: tuple = tuple(float(v) for v in range(-6, 13))
    doppler_min_hz: float = -100.0
    doppler_max_hz: float = 100.0
    doppler_step_hz: float = 5.0
    pfa: float = 1e-3
    loading: float = 0.01
    rank: int = 6
    branches: int = 8
    interp_len: int = 8
    iterations: int = 5
    evd_selection: str = "csm"
    evd_rank: int | None = None
    krylov_rank: int | None = None
    sa_penalty: float | None = None
    sa_epsilon: float = 0.1
    ka_mode: str = "optimal_eta"
    ka_alpha: float = 0.5
    ka_eta: float = 0.5
    prior_velocity_fraction: float = 0.05
    prior_cnr_offset_db: float = -3.0
    m_grid: tuple = (32, 64, 128, 256)
    seed: int | None = None  # None -> scene master_seed
    out_dir: str = "."
    failure_budget: float = 0.01
    threads: int = 1

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"kind must be one of {EXPERIMENT_KINDS}, got {self.kind!r}")
        if not self.algorithms:
            raise ConfigError("algorithms must be nonempty")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.trials < 1 or self.designs < 1:
            raise ConfigError("trials and designs must be >= 1")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must be nonempty")
        if not self.m_grid:
            raise ConfigError("m_grid must be nonempty")
        if self.doppler_step_hz <= 0:
            raise ConfigError("doppler_step_hz must be positive")
        if not 0.0 < self.pfa <= 1.0:
            raise ConfigError(f"pfa must be in (0, 1], got {self.pfa}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def doppler_grid(self) -> tuple:
        grid, value = [], self.doppler_min_hz
        while value <= self.doppler_max_hz + 1e-9:
            grid.append(round(value, 9))
            value += self.doppler_step_hz
        return tuple(grid)

    def effective_k_train(self) -> int:
        if self.k_train is not None:
            return self.k_train
        return 200 if self.kind == "pd-vs-snr" else 100


def _parse_bool_none(raw: str):
    return None if raw.lower() in ("none", "auto") else raw


def _to_int(raw: str, key: str, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"line {line}: {key} expects an integer, got {raw!r}") from None


def _to_float(raw: str, key: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {line}: {key} expects a number, got {raw!r}") from None


_SCENE_INT = {"num_sensors", "num_pulses", "clutter_patches", "range_ambiguities", "master_seed"}
_SCENE_FLOAT = {
    "carrier_frequency_hz",
    "prf_hz",
    "platform_velocity_mps",
    "platform_height_m",
    "noise_power",
}
_SCENE_OPT_FLOAT = {"element_spacing_m", "cnr_db"}

_EXP_INT = {"runs", "trials", "designs", "k_max", "branches", "interp_len", "iterations",
            "rank", "threads"}
_EXP_OPT_INT = {"k_train", "evd_rank", "krylov_rank", "seed"}
_EXP_FLOAT = {"doppler_min_hz", "doppler_max_hz", "doppler_step_hz", "pfa", "loading",
              "sa_epsilon", "ka_alpha", "ka_eta", "prior_velocity_fraction",
              "prior_cnr_offset_db", "failure_budget"}
_EXP_OPT_FLOAT = {"sa_penalty"}
_EXP_STR = {"kind", "evd_selection", "ka_mode", "out_dir"}
_EXP_LISTS = {"algorithms", "snr_grid_db", "k_grid", "m_grid"}

_JAMMER_KEYS = {"azimuth_deg", "jnr_db"}
_TARGET_KEYS = {"azimuth_deg", "doppler_hz", "snr_db"}


def parse_config_text(text: str):
    """Parse configuration text into (RadarConfig, ExperimentSpec)."""
    scene_kw: dict = {}
    exp_kw: dict = {}
    jammers: list = []
    target_kw: dict = {}
    jammers_cleared = False
    section = None
    current_jammer: dict = {}

    def flush_jammer(line_no):
        nonlocal current_jammer
        if section == "jammer":
            missing = _JAMMER_KEYS - current_jammer.keys()
            if missing:
                raise ConfigError(f"line {line_no}: [jammer] section missing {sorted(missing)}")
            jammers.append(scene.JammerSpec(**current_jammer))
            current_jammer = {}

    lines = text.splitlines()
    for line_no, raw_line in enumerate(lines, start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {line_no}: malformed section header {line!r}")
            flush_jammer(line_no)
            name = line[1:-1].strip().lower()
            if name not in ("jammer", "target", "experiment"):
                raise ConfigError(f"line {line_no}: unknown section [{name}]")
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if section is None:
            if key in _SCENE_INT:
                scene_kw[key] = _to_int(raw, key, line_no)
            elif key in _SCENE_FLOAT:
                scene_kw[key] = _to_float(raw, key, line_no)
            elif key in _SCENE_OPT_FLOAT:
                value = _parse_bool_none(raw)
                scene_kw[key] = None if value is None else _to_float(raw, key, line_no)
            elif key == "jammers":
                if raw.lower() != "none":
                    raise ConfigError(
                        f"line {line_no}: jammers accepts only 'none'; use [jammer] sections"
                    )
                jammers_cleared = True
            else:
                raise ConfigError(f"line {line_no}: unknown scene key {key!r}")
        elif section == "jammer":
            if key not in _JAMMER_KEYS:
                raise ConfigError(f"line {line_no}: unknown jammer key {key!r}")
            current_jammer[key] = _to_float(raw, key, line_no)
        elif section == "target":
            if key not in _TARGET_KEYS:
                raise ConfigError(f"line {line_no}: unknown target key {key!r}")
            target_kw[key] = _to_float(raw, key, line_no)
        else:  # experiment
            if key in _EXP_INT:
                exp_kw[key] = _to_int(raw, key, line_no)
            elif key in _EXP_OPT_INT:
                value = _parse_bool_none(raw)
                exp_kw[key] = None if value is None else _to_int(raw, key, line_no)
            elif key in _EXP_FLOAT:
                exp_kw[key] = _to_float(raw, key, line_no)
            elif key in _EXP_OPT_FLOAT:
                value = _parse_bool_none(raw)
                exp_kw[key] = None if value is None else _to_float(raw, key, line_no)
            elif key in _EXP_STR:
                exp_kw[key] = raw
            elif key in _EXP_LISTS:
                if key == "k_grid" and raw.lower() == "none":
                    exp_kw[key] = None
                    continue
                items = [part.strip() for part in raw.split(",") if part.strip()]
                if key == "algorithms":
                    exp_kw[key] = tuple(items)
                elif key == "snr_grid_db":
                    exp_kw[key] = tuple(_to_float(v, key, line_no) for v in items)
                else:
                    exp_kw[key] = tuple(_to_int(v, key, line_no) for v in items)
            else:
                raise ConfigError(f"line {line_no}: unknown experiment key {key!r}")
    flush_jammer(len(lines))

    if jammers or jammers_cleared:
        scene_kw["jammers"] = tuple(jammers)
    try:
        cfg = scene.RadarConfig(**scene_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if target_kw:
        cfg_target = scene.TargetSpec(**target_kw)
    else:
        cfg_target = scene.TargetSpec()
    spec = ExperimentSpec(**exp_kw)
    for name in spec.algorithms:
        if name not in DEFAULT_ALGORITHMS:
            raise ConfigError(f"unknown algorithm {name!r} in algorithms list")
    return cfg, cfg_target, spec


def parse_config(path):
    """Parse a configuration file; see :func:`parse_config_text`."""
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def _fmt_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return format(value, ".17g")  # lossless float round-trip
    return str(value)


def serialize_config(cfg: scene.RadarConfig, target: scene.TargetSpec, spec: ExperimentSpec) -> str:
    """Render a configuration that parses back to identical structures."""
    out = []
    for f in fields(scene.RadarConfig):
        if f.name == "jammers":
            continue
        out.append(f"{f.name} = {_fmt_value(getattr(cfg, f.name))}")
    if cfg.jammers:
        for jam in cfg.jammers:
            out.append("")
            out.append("[jammer]")
            out.append(f"azimuth_deg = {_fmt_value(jam.azimuth_deg)}")
            out.append(f"jnr_db = {_fmt_value(jam.jnr_db)}")
    else:
        out.insert(0, "jammers = none")
    out.append("")
    out.append("[target]")
    for f in fields(scene.TargetSpec):
        out.append(f"{f.name} = {_fmt_value(getattr(target, f.name))}")
    out.append("")
    out.append("[experiment]")
    for f in fields(ExperimentSpec):
        value = getattr(spec, f.name)
        if f.name in _EXP_LISTS and value is not None:
            rendered = ", ".join(_fmt_value(v) for v in value)
            out.append(f"{f.name} = {rendered}")
        elif f.name == "k_grid" and value is None:
            out.append("k_grid = none")
        else:
            out.append(f"{f.name} = {_fmt_value(value)}")
    return "\n".join(out) + "\n"
