"""Experiment configuration: trick stack, training hyperparameters, spec files.

Spec files are flat `dotted.key = value` lines, one assignment per line,
with # comments.  Grid axes are comma-separated lists under `grid.`:

    dataset = cora
    trick.backbone = gcn
    trick.depth = 32
    trick.skip.mode = initial
    train.lr = 0.005
    grid.trick.skip.alpha = 0.1, 0.2, 0.4
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .dropping import DropSpec
from .errors import ConfigError
from .norms import NormSpec
from .skips import SkipSpec

BACKBONES = ("gcn", "sgc")


@dataclass
class TrickConfig:
    backbone: str = "gcn"
    depth: int = 2
    hidden_dim: int = 64
    skip: SkipSpec = field(default_factory=SkipSpec)
    norm: NormSpec = field(default_factory=NormSpec)
    drop: DropSpec = field(default_factory=DropSpec)
    identity_mapping: bool = False
    identity_lambda: float = 0.1

    def validate(self):
        if self.backbone not in BACKBONES:
            raise ConfigError(f"unknown backbone {self.backbone!r}, expected one of {BACKBONES}")
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.hidden_dim < 1:
            raise ConfigError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.identity_mapping and self.backbone != "gcn":
            raise ConfigError("identity mapping needs per-layer weights, backbone must be gcn")
        if self.identity_lambda <= 0:
            raise ConfigError(f"identity_lambda must be positive, got {self.identity_lambda}")
        self.skip.validate()
        self.norm.validate()
        self.drop.validate()


@dataclass
class TrainConfig:
    lr: float = 0.01
    weight_decay: float = 5e-4
    weight_decay_out: float | None = None  # optional separate decay for the output transform
    max_epochs: int = 1000
    patience: int = 100
    label_smoothing: float = 0.0

    def validate(self):
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.weight_decay_out is not None and self.weight_decay_out < 0:
            raise ConfigError(f"weight_decay_out must be >= 0, got {self.weight_decay_out}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ConfigError(f"label_smoothing must be in [0, 1), got {self.label_smoothing}")


@dataclass
class ExperimentSpec:
    dataset: str = ""
    trick: TrickConfig = field(default_factory=TrickConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    repetitions: int = 10
    seed_base: int = 0
    grid: dict = field(default_factory=dict)  # dotted key -> list of values
    com_search: bool = False

    def validate(self):
        if not self.dataset:
            raise ConfigError("spec needs a dataset")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if len(self.grid) > 2:
            raise ConfigError(f"grids support at most 2 axes, got {len(self.grid)}")
        for key in self.grid:
            _resolve_field(self, key)  # raises on unknown targets
        self.trick.validate()
        self.train.validate()
        if self.trick.skip.mode not in ("dense", "jumping") and self.com_search:
            raise ConfigError("com_search needs skip.mode dense or jumping")

    def copy(self) -> "ExperimentSpec":
        return dataclasses.replace(
            self,
            trick=dataclasses.replace(
                self.trick,
                skip=dataclasses.replace(self.trick.skip),
                norm=dataclasses.replace(self.trick.norm),
                drop=dataclasses.replace(self.trick.drop)),
            train=dataclasses.replace(self.train),
            grid=dict(self.grid))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_KEY_ALIASES = {"reps": "repetitions"}

# fields whose default is None and can't be type-sniffed
_EXPLICIT_TYPES = {"train.weight_decay_out": float}


def _resolve_field(spec, dotted):
    parts = dotted.split(".")
    obj = spec
    for p in parts[:-1]:
        if not dataclasses.is_dataclass(obj) or p not in {f.name for f in dataclasses.fields(obj)}:
            raise ConfigError(f"unknown config key {dotted!r}")
        obj = getattr(obj, p)
    leaf = parts[-1]
    if not dataclasses.is_dataclass(obj) or leaf not in {f.name for f in dataclasses.fields(obj)}:
        raise ConfigError(f"unknown config key {dotted!r}")
    return obj, leaf


def _coerce(raw: str, dotted: str, current):
    raw = raw.strip()
    target = _EXPLICIT_TYPES.get(dotted)
    if target is None:
        target = type(current)
    if current is None and dotted not in _EXPLICIT_TYPES:
        target = str
    if target is bool:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigError(f"{dotted}: expected a boolean, got {raw!r}")
    if target is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{dotted}: expected an integer, got {raw!r}") from None
    if target is float:
        if raw.lower() == "none" and dotted in _EXPLICIT_TYPES:
            return None
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{dotted}: expected a number, got {raw!r}") from None
    return raw


def set_option(spec: ExperimentSpec, dotted: str, raw: str):
    """Apply one `key = value` assignment to the spec in place."""
    dotted = _KEY_ALIASES.get(dotted, dotted)
    if dotted.startswith("grid."):
        target = dotted[len("grid."):]
        obj, leaf = _resolve_field(spec, target)
        current = getattr(obj, leaf)
        spec.grid[target] = [_coerce(v, target, current) for v in raw.split(",")]
        return
    obj, leaf = _resolve_field(spec, dotted)
    current = getattr(obj, leaf)
    setattr(obj, leaf, _coerce(raw, dotted, current))
    if dotted == "trick.skip.com" and spec.trick.skip.mode not in ("dense", "jumping"):
        raise ConfigError("trick.skip.com is set but skip.mode is neither dense nor jumping")


def parse_spec_text(text: str) -> ExperimentSpec:
    """Parse the flat key=value grammar into a validated ExperimentSpec."""
    spec = ExperimentSpec()
    assignments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {line.rstrip()!r}")
        key, raw = body.split("=", 1)
        assignments.append((lineno, key.strip(), raw.strip()))
    # apply skip.mode and other structure first so com checks see final modes
    assignments.sort(key=lambda a: 0 if a[1] != "trick.skip.com" else 1)
    for lineno, key, raw in assignments:
        try:
            set_option(spec, key, raw)
        except ConfigError as e:
            raise ConfigError(f"line {lineno}: {e}") from None
    spec.validate()
    return spec


def parse_spec_file(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_spec_text(f.read())


def format_spec(spec: ExperimentSpec) -> str:
    """Inverse of parse_spec_text for the preset emitter."""
    t, tr = spec.trick, spec.train
    lines = [
        f"dataset = {spec.dataset}",
        f"reps = {spec.repetitions}",
        f"seed_base = {spec.seed_base}",
        f"trick.backbone = {t.backbone}",
        f"trick.depth = {t.depth}",
        f"trick.hidden_dim = {t.hidden_dim}",
        f"trick.skip.mode = {t.skip.mode}",
        f"trick.skip.alpha = {t.skip.alpha}",
    ]
    if t.skip.uses_com:
        lines.append(f"trick.skip.com = {t.skip.com}")
        lines.append(f"trick.skip.attention_softmax = {str(t.skip.attention_softmax).lower()}")
    lines.append(f"trick.norm.kind = {t.norm.kind}")
    if t.norm.kind == "pair":
        lines.append(f"trick.norm.scale = {t.norm.scale}")
    if t.norm.kind in ("node", "comb"):
        lines.append(f"trick.norm.power = {t.norm.power}")
    if t.norm.kind in ("group", "comb"):
        lines.append(f"trick.norm.groups = {t.norm.groups}")
        lines.append(f"trick.norm.skip_weight = {t.norm.skip_weight}")
    lines += [
        f"trick.drop.feature_dropout = {t.drop.feature_dropout}",
        f"trick.drop.scheme = {t.drop.scheme}",
        f"trick.drop.graph_rate = {t.drop.graph_rate}",
        f"trick.drop.layerwise = {str(t.drop.layerwise).lower()}",
        f"trick.identity_mapping = {str(t.identity_mapping).lower()}",
        f"trick.identity_lambda = {t.identity_lambda}",
        f"train.lr = {tr.lr}",
        f"train.weight_decay = {tr.weight_decay}",
        f"train.max_epochs = {tr.max_epochs}",
        f"train.patience = {tr.patience}",
        f"train.label_smoothing = {tr.label_smoothing}",
    ]
    if tr.weight_decay_out is not None:
        lines.append(f"train.weight_decay_out = {tr.weight_decay_out}")
    for key, values in spec.grid.items():
        lines.append(f"grid.{key} = " + ", ".join(str(v) for v in values))
    if spec.com_search:
        lines.append("com_search = true")
    return "\n".join(lines) + "\n"
