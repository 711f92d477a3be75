"""Run configuration: TOML parsing, validation, and round-trip echo.

Configs are sectioned key = value files (TOML). Validation walks the
parsed tree against the schema below, rejects unknown keys, and collects
every error instead of stopping at the first. The resolved config can be
serialized back to TOML that re-parses to an identical RunConfig, which is
how output files embed their provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:          # Python < 3.11
    import tomli as _toml

from .measures import LevyMeasure

SUBCOMMANDS = ("simulate-sheet", "basis", "chaos-check", "whitenoise",
               "ml-eval", "solve-heat")


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class MeasureSpec:
    atoms: tuple = ((-1.0, 0.5), (1.0, 0.5))

    def build(self) -> LevyMeasure:
        return LevyMeasure.from_atoms(list(self.atoms))


@dataclass(frozen=True)
class DomainSpec:
    upper: tuple = (1.0,)
    lower: tuple = None


@dataclass(frozen=True)
class TruncationSpec:
    epsilon: float = 0.0
    J: int = 50
    J_prime: int = 2
    K_max: int = 10_000
    Y_max: float = 0.0        # 0 -> automatic
    X_max: float = 0.0        # 0 -> automatic


@dataclass(frozen=True)
class McSpec:
    n_samples: int = 10_000
    seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class SheetSpec:
    kind: str = "levy"                    # "levy" | "brownian"
    box_lower: tuple = (0.0,)
    box_upper: tuple = (1.0,)
    u_grid: tuple = (0.5, 1.0, 2.0, 4.0)
    grid_points: int = 9                  # brownian partition per axis


@dataclass(frozen=True)
class BasisSpec:
    n: int = 1
    j_max: int = 30
    x_points: tuple = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class ChaosSpec:
    max_order: int = 2
    n_theta: int = 6
    domain_halfwidth: float = 8.0


@dataclass(frozen=True)
class WhitenoiseSpec:
    x: tuple = (1.0,)
    levels: tuple = (25, 50, 100, 200, 400)
    hida_q: int = 2


@dataclass(frozen=True)
class MlSpec:
    alpha: float = 1.0
    beta: float = 1.0
    z_min: float = -40.0
    z_max: float = 20.0
    n_points: int = 121


@dataclass(frozen=True)
class HeatSpec:
    alpha: float = 0.7
    lam: float = 0.5
    sigma: float = 0.3
    gamma: float = 0.3
    d: int = 1
    t: float = 1.0
    x_points: tuple = (-2.0, -1.0, 0.0, 1.0, 2.0)
    nt: int = 48
    nx: int = 96


@dataclass(frozen=True)
class RunConfig:
    subcommand: str = "simulate-sheet"
    measure: MeasureSpec = field(default_factory=MeasureSpec)
    domain: DomainSpec = field(default_factory=DomainSpec)
    truncation: TruncationSpec = field(default_factory=TruncationSpec)
    mc: McSpec = field(default_factory=McSpec)
    sheet: SheetSpec = field(default_factory=SheetSpec)
    basis: BasisSpec = field(default_factory=BasisSpec)
    chaos: ChaosSpec = field(default_factory=ChaosSpec)
    whitenoise: WhitenoiseSpec = field(default_factory=WhitenoiseSpec)
    ml: MlSpec = field(default_factory=MlSpec)
    heat: HeatSpec = field(default_factory=HeatSpec)
    out: str = "out.csv"
    preset: str = ""


_SECTIONS = {
    "measure": MeasureSpec, "domain": DomainSpec,
    "truncation": TruncationSpec, "mc": McSpec, "sheet": SheetSpec,
    "basis": BasisSpec, "chaos": ChaosSpec, "whitenoise": WhitenoiseSpec,
    "ml": MlSpec, "heat": HeatSpec,
}
_TOP_KEYS = {"subcommand", "out", "preset"}


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem."""
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    problems = []
    kwargs = {}
    for key, value in raw.items():
        if key in _TOP_KEYS:
            kwargs[key] = value
        elif key in _SECTIONS:
            cls = _SECTIONS[key]
            known = {f.name for f in fields(cls)}
            sect = {}
            if not isinstance(value, dict):
                problems.append(f"{key}: expected a section")
                continue
            for k, v in value.items():
                if k not in known:
                    problems.append(f"unknown key {key}.{k}")
                else:
                    sect[k] = _tuplify(v)
            try:
                kwargs[key] = cls(**sect)
            except (TypeError, ValueError) as exc:
                problems.append(f"{key}: {exc}")
        else:
            problems.append(f"unknown key {key}")
    try:
        cfg = RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(problems + [f"top level: {exc}"])
    problems += validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def validate(cfg: RunConfig) -> list:
    """All semantic problems, each tagged with its key path."""
    p = []
    if cfg.subcommand not in SUBCOMMANDS:
        p.append(f"subcommand: unknown {cfg.subcommand!r}; "
                 f"choose from {', '.join(SUBCOMMANDS)}")
    for z, w in cfg.measure.atoms:
        if z == 0:
            p.append("measure.atoms: atom at z=0 forbidden")
        if w <= 0:
            p.append(f"measure.atoms: weight {w} must be positive")
    if cfg.truncation.epsilon < 0:
        p.append("truncation.epsilon: must be >= 0")
    if cfg.truncation.J < 1:
        p.append("truncation.J: must be >= 1")
    if cfg.truncation.J_prime < 1:
        p.append("truncation.J_prime: must be >= 1")
    if cfg.mc.n_samples < 1:
        p.append("mc.n_samples: must be >= 1")
    if cfg.mc.seed < 0:
        p.append("mc.seed: must be a u64")
    if cfg.mc.workers < 1:
        p.append("mc.workers: must be >= 1")
    if cfg.sheet.kind not in ("levy", "brownian"):
        p.append("sheet.kind: must be 'levy' or 'brownian'")
    upper = np.atleast_1d(cfg.domain.upper)
    lower = (np.zeros(upper.size) if cfg.domain.lower is None
             else np.atleast_1d(cfg.domain.lower))
    if lower.size != upper.size:
        p.append("domain: lower/upper dimension mismatch")
    elif np.any(np.asarray(upper, float) <= np.asarray(lower, float)):
        p.append("domain: upper must exceed lower componentwise")
    if cfg.basis.n < 1:
        p.append("basis.n: must be >= 1")
    if cfg.basis.j_max < 1:
        p.append("basis.j_max: must be >= 1")
    if cfg.chaos.max_order not in (0, 1, 2):
        p.append("chaos.max_order: fast sampler covers orders 0..2")
    if cfg.chaos.n_theta < 1:
        p.append("chaos.n_theta: must be >= 1")
    if not 0.0 < cfg.ml.alpha <= 2.0:
        p.append("ml.alpha: must be in (0, 2]")
    if cfg.ml.beta <= 0:
        p.append("ml.beta: must be positive")
    if cfg.ml.n_points < 2:
        p.append("ml.n_points: must be >= 2")
    if not 0.0 < cfg.heat.alpha < 2.0:
        p.append("heat.alpha: must be in the (0, 2) range of the "
                 "time-fractional order")
    if cfg.heat.lam <= 0:
        p.append("heat.lam: must be positive")
    if cfg.heat.d not in (1, 2):
        p.append("heat.d: must be 1 or 2")
    if cfg.heat.t <= 0:
        p.append("heat.t: must be positive")
    if cfg.heat.nt < 2 or cfg.heat.nx < 2:
        p.append("heat: nt and nx must be >= 2")
    return p


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    """TOML text that parse_config maps back to an identical RunConfig."""
    lines = [f"subcommand = {_toml_value(cfg.subcommand)}",
             f"out = {_toml_value(cfg.out)}",
             f"preset = {_toml_value(cfg.preset)}"]
    for name, cls in _SECTIONS.items():
        sect = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(cls):
            v = getattr(sect, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: RunConfig, subcommand: str = None, out: str = None,
                   seed: int = None, workers: int = None,
                   preset: str = None) -> RunConfig:
    """CLI flags win over file values."""
    from dataclasses import replace
    mc = cfg.mc
    if seed is not None or workers is not None:
        mc = McSpec(n_samples=mc.n_samples,
                    seed=mc.seed if seed is None else int(seed),
                    workers=mc.workers if workers is None else int(workers))
    return replace(
        cfg,
        subcommand=cfg.subcommand if subcommand is None else subcommand,
        out=cfg.out if out is None else out,
        preset=cfg.preset if preset is None else preset,
        mc=mc)
