"""Run configuration: flat key-value files with command-line overrides.

A config file holds ``key = value`` lines (blank lines and ``#`` comments
ignored).  Every run writes back the complete effective configuration it
used, so any run can be reproduced byte-for-byte from that file alone.
"""

from dataclasses import dataclass, fields

from .augment import AugmentSpec
from .errors import ConfigError
from .init import SlopeInterval

SEED_ENV_VAR = "ERICNN_SEED"


@dataclass
class RunConfig:
    data_root: str = ""
    test_root: str = ""
    out_dir: str = "runs/run"
    seed: int = 0
    alpha_min: float = 30.0
    init: str = "eri"
    epochs: int = 100
    batch_size: int = 32
    lr: float = 1e-4
    split_fraction: float = 0.8
    data_align: bool = True
    positive_dir: str = "cactus"
    negative_dir: str = "no_cactus"
    aug_scaling: bool = True
    aug_horizontal_flip: bool = True
    aug_rotation: bool = True
    aug_zoom: bool = True
    aug_intensity_shift: bool = True
    aug_lighting: bool = True
    rotation_max_deg: float = 10.0
    scale_min: float = 0.9
    scale_max: float = 1.1
    zoom_min: float = 0.9
    zoom_max: float = 1.1
    intensity_shift_min: float = -0.1
    intensity_shift_max: float = 0.1
    lighting_gamma_min: float = 0.8
    lighting_gamma_max: float = 1.25

    def validate(self):
        if self.init not in ("eri", "baseline"):
            raise ConfigError(f"init must be 'eri' or 'baseline', got '{self.init}'")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split_fraction must lie in (0, 1), got {self.split_fraction}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        try:
            self.interval()
            self.augment_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def interval(self):
        return SlopeInterval(self.alpha_min)

    def augment_spec(self):
        return AugmentSpec(
            scaling=self.aug_scaling,
            horizontal_flip=self.aug_horizontal_flip,
            rotation=self.aug_rotation,
            zoom=self.aug_zoom,
            intensity_shift=self.aug_intensity_shift,
            lighting=self.aug_lighting,
            rotation_max_deg=self.rotation_max_deg,
            scale_range=(self.scale_min, self.scale_max),
            zoom_range=(self.zoom_min, self.zoom_max),
            intensity_shift_range=(self.intensity_shift_min, self.intensity_shift_max),
            lighting_gamma_range=(self.lighting_gamma_min, self.lighting_gamma_max),
        )

    def without_augmentation(self):
        out = RunConfig(**{f.name: getattr(self, f.name) for f in fields(self)})
        out.aug_scaling = out.aug_horizontal_flip = out.aug_rotation = False
        out.aug_zoom = out.aug_intensity_shift = out.aug_lighting = False
        return out

    def to_text(self):
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    def apply(self, overrides):
        """Set fields from a {name: string-or-typed-value} mapping."""
        valid = {f.name: f for f in fields(self)}
        for key, value in overrides.items():
            if key not in valid:
                raise ConfigError(f"unknown config key '{key}'")
            if isinstance(value, str):
                value = _parse_value(key, value, type(getattr(self, key)))
            setattr(self, key, value)
        return self


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key, text, target_type):
    text = text.strip()
    if target_type is bool:
        low = text.lower()
        if low in ("true", "on", "yes", "1"):
            return True
        if low in ("false", "off", "no", "0"):
            return False
        raise ConfigError(f"cannot read '{text}' as a boolean for '{key}'")
    try:
        if target_type is int:
            return int(text)
        if target_type is float:
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot read '{text}' as {target_type.__name__} "
                          f"for '{key}'") from exc
    return text


def parse_config_text(text):
    """Key/value pairs from config file text."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw}'")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return RunConfig().apply(parse_config_text(text))
