"""Experiment configuration and report plumbing.

Configs are flat JSON documents with strict key checking; reports are JSON
documents that validate against :data:`REPORT_SCHEMA` and contain no
timing information, so a repeated run with the same config produces
byte-identical output (wall time goes to a sibling ``timing.json``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

EXPERIMENT_KINDS = (
    "doa", "doa-restarts", "deconv", "trimmed-lr", "mkl", "mkl-bank", "pde", "fig1",
)


class ConfigError(ValueError):
    """Raised for malformed experiment configuration (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    out_dir: str = "results"
    full_scale: bool = False
    overrides: dict = field(default_factory=dict)

    _KNOWN_OVERRIDES = {
        "doa": {"m", "n", "num_snapshots", "noise_sigma", "lam_fraction", "ridge",
                "grad_tol", "max_iters", "source_angles", "source_amps",
                "music_threshold_factor"},
        "doa-restarts": {"m", "n", "num_snapshots", "noise_sigma", "lam_fraction", "ridge",
                         "grad_tol", "max_iters", "num_restarts", "joint_max_iters",
                         "source_angles", "source_amps"},
        "deconv": {"grid_size", "num_blobs", "noise_sigma", "lam_fraction", "ridge",
                   "num_peaks", "init_scale", "budget", "grad_tol"},
        "trimmed-lr": {"n_train", "n_test", "dim", "contamination", "noise_scale",
                       "inlier_fraction", "beta", "ridge", "replicates", "grad_tol"},
        "mkl": {"n_train", "n_test", "C", "beta", "tol", "max_iters"},
        "mkl-bank": {"n_train", "n_test", "C", "beta", "tol", "max_iters", "surface_grid"},
        "pde": {"n", "d", "noise_sigma", "lambda_ladder", "grad_tol"},
        "fig1": {"x_min", "x_max", "num_points"},
    }

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        unknown = set(self.overrides) - self._KNOWN_OVERRIDES[self.kind]
        if unknown:
            raise ConfigError(
                f"unknown config keys for {self.kind}: {sorted(unknown)}"
            )

    @classmethod
    def from_file(cls, path, kind=None, seed=None, out_dir=None, full_scale=None):
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        base = {
            "kind": raw.pop("kind", kind),
            "seed": raw.pop("seed", 0),
            "out_dir": raw.pop("out_dir", "results"),
            "full_scale": raw.pop("full_scale", False),
        }
        cfg = cls(overrides=raw, **base)
        return cls._apply_cli(cfg, kind, seed, out_dir, full_scale)

    @classmethod
    def _apply_cli(cls, cfg, kind, seed, out_dir, full_scale):
        return cls(
            kind=kind if kind is not None else cfg.kind,
            seed=seed if seed is not None else cfg.seed,
            out_dir=out_dir if out_dir is not None else cfg.out_dir,
            full_scale=full_scale if full_scale is not None else cfg.full_scale,
            overrides=cfg.overrides,
        )

    def get(self, key, default):
        return self.overrides.get(key, default)

    def echo(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "full_scale": self.full_scale,
            "overrides": dict(sorted(self.overrides.items())),
        }


REPORT_SCHEMA = {
    "type": "object",
    "required": ["experiment", "config", "generator", "metrics", "files"],
    "properties": {
        "experiment": {"type": "string", "enum": list(EXPERIMENT_KINDS)},
        "config": {
            "type": "object",
            "required": ["kind", "seed", "full_scale", "overrides"],
            "properties": {
                "kind": {"type": "string"},
                "seed": {"type": "integer"},
                "full_scale": {"type": "boolean"},
                "overrides": {"type": "object"},
            },
        },
        "generator": {
            "type": "object",
            "required": ["name", "numpy_version"],
            "properties": {
                "name": {"type": "string"},
                "numpy_version": {"type": "string"},
            },
        },
        "ground_truth": {"type": "object"},
        "metrics": {"type": "object"},
        "solver": {"type": "object"},
        "files": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
}


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_report(report: dict, out_dir) -> Path:
    report = _jsonable(report)
    validate_report(report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def write_timing(seconds: float, out_dir) -> Path:
    path = Path(out_dir) / "timing.json"
    path.write_text(json.dumps({"wall_seconds": seconds}) + "\n")
    return path


def write_csv(path, columns: dict) -> None:
    """Write named float columns to CSV at full double precision."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
