"""Run configuration, ablation switches and config-file handling."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace

DATA_DIR_ENV = "DM_ALIGN_DATA_DIR"
DEFAULT_DATA_DIR = "dmalign_data"

ABLATION_NAMES = (
    "no_diffusion_mask",
    "no_noise_cancellation",
    "no_refinement",
    "no_modifiers",
    "no_nonshared_keep",
)


@dataclass(frozen=True)
class AblationFlags:
    no_diffusion_mask: bool = False
    no_noise_cancellation: bool = False
    no_refinement: bool = False
    no_modifiers: bool = False
    no_nonshared_keep: bool = False

    @classmethod
    def from_names(cls, names) -> "AblationFlags":
        names = [n.strip() for n in names if n.strip()]
        unknown = set(names) - set(ABLATION_NAMES)
        if unknown:
            raise ValueError(f"unknown ablation flags: {sorted(unknown)}")
        return cls(**{name: True for name in names})

    def enabled(self) -> list[str]:
        return [name for name in ABLATION_NAMES if getattr(self, name)]


@dataclass(frozen=True)
class EditConfig:
    steps: int = 50
    guidance: float = 7.5
    threshold: float = 0.5
    seed: int = 0
    t_noise: int | None = None  # defaults to ceil(steps / 2)
    min_confidence: float = 0.5
    max_span: int = 3
    ablations: AblationFlags = field(default_factory=AblationFlags)

    def resolved_t_noise(self) -> int:
        if self.t_noise is not None:
            return self.t_noise
        return int(-(-self.steps // 2))  # ceil

    def snapshot(self) -> dict:
        return {
            "steps": self.steps,
            "guidance": self.guidance,
            "threshold": self.threshold,
            "seed": self.seed,
            "t_noise": self.t_noise,
            "min_confidence": self.min_confidence,
            "max_span": self.max_span,
            "ablations": self.ablations.enabled(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "EditConfig":
        payload = dict(payload)
        ablations = payload.pop("ablations", [])
        if isinstance(ablations, dict):
            flags = AblationFlags(**ablations)
        else:
            flags = AblationFlags.from_names(ablations)
        allowed = {f.name for f in fields(cls)} - {"ablations"}
        unknown = set(payload) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(ablations=flags, **payload)

    def merged(self, overrides: dict) -> "EditConfig":
        overrides = dict(overrides)
        ablations = overrides.pop("ablations", None)
        cfg = replace(self, **overrides) if overrides else self
        if ablations is not None:
            flags = (
                AblationFlags(**ablations)
                if isinstance(ablations, dict)
                else AblationFlags.from_names(ablations)
            )
            cfg = replace(cfg, ablations=flags)
        return cfg


def load_config_file(path) -> EditConfig:
    with open(path, encoding="utf-8") as fh:
        return EditConfig.from_dict(json.load(fh))


def data_dir() -> str:
    return os.environ.get(DATA_DIR_ENV, DEFAULT_DATA_DIR)
