"""Experiment configuration: INI parsing and the benchmark hyper-parameter grid.

Configs are plain key-value text with one section per concern so they diff
cleanly and can live next to the runs they produced. Seeds inside the
parsed trainer configs are placeholders; the runner derives the real ones
from the master seed per depth and phase.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

from .dae import CROSS_ENTROPY, SIGMOID, DaeTrainConfig
from .data import SyntheticSpec
from .errors import ConfigError
from .ivs import IvsConfig
from .mlr import TrainConfig

MAX_DEPTH = 3

# Validation-set candidate grids used by the published benchmark protocol.
GRID_PRECLASSIFIER_LR = (0.01, 0.02, 0.05, 0.1)
GRID_TRAIN_LR = (0.01, 0.05, 0.1, 0.2)
GRID_THRESHOLD = (0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
GRID_NOISE_SD = (0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4)
GRID_EPOCHS = (60, 120, 180, 240, 300)

VARIANT_SDAE = "sdae"
VARIANT_SDAE_IVS = "sdae_ivs"


@dataclass
class ExperimentConfig:
    """Everything a run needs: data source, per-layer plans, seed, output."""

    source: str
    synthetic: SyntheticSpec | None
    amat_train: Path | None
    amat_valid: Path | None
    amat_test: Path | None
    zero_based_labels: bool
    train_size: int
    valid_size: int
    test_size: int
    variable_shape: tuple[int, int] | None
    depths: tuple[int, ...]
    variants: tuple[str, ...]
    dae: tuple[DaeTrainConfig, ...]
    ivs: tuple[IvsConfig, ...]
    fine_tune: TrainConfig
    final_ivs: bool
    seed: int
    out: Path
    reconstruct_examples: int
    export_patterns: bool


class _Section:
    """Typed accessors over one INI section with field-naming errors."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.values = dict(parser[name]) if parser.has_section(name) else {}

    def has(self, key: str) -> bool:
        return key in self.values

    def raw(self, key: str, default=None, required: bool = False):
        if key in self.values:
            return self.values[key]
        if required:
            raise ConfigError(f"missing required field [{self.name}] {key}")
        return default

    def _typed(self, key: str, cast, default, required):
        text = self.raw(key, None, required)
        if text is None:
            return default
        try:
            return cast(text)
        except ValueError as exc:
            raise ConfigError(f"bad value for [{self.name}] {key}: {text!r}") from exc

    def integer(self, key, default=None, required=False):
        return self._typed(key, int, default, required)

    def real(self, key, default=None, required=False):
        return self._typed(key, float, default, required)

    def boolean(self, key, default=None, required=False):
        text = self.raw(key, None, required)
        if text is None:
            return default
        lowered = text.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"bad boolean for [{self.name}] {key}: {text!r}")

    def text(self, key, default=None, required=False):
        return self.raw(key, default, required)


def _parse_shape(section: _Section) -> tuple[int, int] | None:
    text = section.text("shape")
    if text is None:
        return None
    parts = text.split()
    if len(parts) != 2:
        raise ConfigError(f"[{section.name}] shape must be two integers, got {text!r}")
    return int(parts[0]), int(parts[1])


def _merged(parser, base: str, layer: int) -> _Section:
    """Base section with per-layer overrides from e.g. [dae.2]."""
    section = _Section(parser, base)
    override = _Section(parser, f"{base}.{layer}")
    section.values = {**section.values, **override.values}
    section.name = f"{base}/{base}.{layer}" if override.values else base
    return section


def _parse_dae(parser, layer: int) -> DaeTrainConfig:
    s = _merged(parser, "dae", layer)
    return DaeTrainConfig(
        hidden_units=s.integer("hidden_units", required=True),
        noise_sd=s.real("noise_sd", required=True),
        learning_rate=s.real("learning_rate", required=True),
        epochs=s.integer("epochs", required=True),
        seed=0,
        loss_kind=s.text("loss", CROSS_ENTROPY),
        decoder_activation=s.text("decoder", SIGMOID),
    )


def _parse_ivs(parser, layer: int) -> IvsConfig:
    s = _merged(parser, "ivs", layer)
    return IvsConfig(
        threshold=s.real("threshold", required=True),
        max_iterations=s.integer("max_iterations", 10),
        mlr=TrainConfig(
            learning_rate=s.real("learning_rate", required=True),
            max_epochs=s.integer("max_epochs", 50),
            patience=s.integer("patience", 5),
            seed=0,
            minibatch_size=s.integer("minibatch_size", 1),
            l2=s.real("l2", 0.0),
        ),
    )


def _parse_train(s: _Section) -> TrainConfig:
    return TrainConfig(
        learning_rate=s.real("learning_rate", required=True),
        max_epochs=s.integer("max_epochs", 50),
        patience=s.integer("patience", 5),
        seed=0,
        minibatch_size=s.integer("minibatch_size", 1),
        l2=s.real("l2", 0.0),
    )


def load_config(path, seed_override: int | None = None,
                out_override=None, paper_grid: bool = False) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    data = _Section(parser, "data")
    source = data.text("source", required=True)
    synthetic = None
    amat_train = amat_valid = amat_test = None
    train_size = data.integer("train_size", 0)
    valid_size = data.integer("valid_size", 0)
    test_size = data.integer("test_size", 0)

    if source == "synthetic":
        synthetic = SyntheticSpec(
            num_relevant=data.integer("relevant", required=True),
            num_irrelevant=data.integer("irrelevant", required=True),
            num_classes=data.integer("classes", required=True),
            class_separation=data.real("separation", required=True),
            noise_sd=data.real("feature_noise_sd", required=True),
            examples_per_split=(
                data.integer("train_size", required=True),
                data.integer("valid_size", required=True),
                data.integer("test_size", required=True),
            ),
        )
        train_size = synthetic.examples_per_split[0]
        valid_size = synthetic.examples_per_split[1]
    elif source == "amat":
        amat_train = Path(data.text("train", required=True))
        if data.has("valid"):
            amat_valid = Path(data.text("valid"))
        if data.has("test"):
            amat_test = Path(data.text("test"))
        if amat_valid is None and valid_size <= 0:
            raise ConfigError("[data] needs either a valid file or valid_size")
    else:
        raise ConfigError(f"[data] source must be synthetic or amat, got {source!r}")

    stack = _Section(parser, "stack")
    depth_text = stack.text("depths", "1")
    try:
        depths = tuple(int(tok) for tok in depth_text.split())
    except ValueError:
        raise ConfigError(f"[stack] depths must be integers, got {depth_text!r}")
    if not depths or any(not 1 <= d <= MAX_DEPTH for d in depths):
        raise ConfigError(f"[stack] depths must lie in 1..{MAX_DEPTH}")

    variant_text = stack.text("variants", "both")
    if variant_text == "both":
        variants = (VARIANT_SDAE, VARIANT_SDAE_IVS)
    elif variant_text in (VARIANT_SDAE, "sdae-ivs", VARIANT_SDAE_IVS):
        variants = (VARIANT_SDAE_IVS if "ivs" in variant_text else VARIANT_SDAE,)
    else:
        raise ConfigError("[stack] variants must be both, sdae, or sdae-ivs")

    max_depth = max(depths)
    dae_cfgs = tuple(_parse_dae(parser, layer) for layer in range(1, max_depth + 1))
    ivs_cfgs = tuple(_parse_ivs(parser, layer) for layer in range(1, max_depth + 1))
    fine_tune = _parse_train(_Section(parser, "finetune"))

    run = _Section(parser, "run")
    seed = run.integer("seed", 0) if seed_override is None else seed_override
    out = Path(out_override) if out_override is not None \
        else Path(run.text("out", "runs/out"))

    cfg = ExperimentConfig(
        source=source,
        synthetic=synthetic,
        amat_train=amat_train,
        amat_valid=amat_valid,
        amat_test=amat_test,
        zero_based_labels=data.text("labels", "zero") == "zero",
        train_size=train_size,
        valid_size=valid_size,
        test_size=test_size,
        variable_shape=_parse_shape(data),
        depths=depths,
        variants=variants,
        dae=dae_cfgs,
        ivs=ivs_cfgs,
        fine_tune=fine_tune,
        final_ivs=stack.boolean("final_ivs", False),
        seed=seed,
        out=out,
        reconstruct_examples=run.integer("reconstruct_examples", 0),
        export_patterns=run.boolean("export_patterns", False),
    )
    if paper_grid:
        validate_paper_grid(cfg)
    return cfg


def _in_grid(value, grid) -> bool:
    return any(math.isclose(value, item, rel_tol=1e-12) for item in grid)


def validate_paper_grid(cfg: ExperimentConfig) -> None:
    """Reject hyper-parameters outside the benchmark candidate sets."""
    for i, ivs_cfg in enumerate(cfg.ivs, start=1):
        if not _in_grid(ivs_cfg.mlr.learning_rate, GRID_PRECLASSIFIER_LR):
            raise ConfigError(
                f"[ivs] layer {i} learning_rate {ivs_cfg.mlr.learning_rate} "
                f"outside candidate set {GRID_PRECLASSIFIER_LR}")
        if not _in_grid(ivs_cfg.threshold, GRID_THRESHOLD):
            raise ConfigError(
                f"[ivs] layer {i} threshold {ivs_cfg.threshold} "
                f"outside candidate set {GRID_THRESHOLD}")
    for i, dae_cfg in enumerate(cfg.dae, start=1):
        if not _in_grid(dae_cfg.learning_rate, GRID_TRAIN_LR):
            raise ConfigError(
                f"[dae] layer {i} learning_rate {dae_cfg.learning_rate} "
                f"outside candidate set {GRID_TRAIN_LR}")
        if not _in_grid(dae_cfg.noise_sd, GRID_NOISE_SD):
            raise ConfigError(
                f"[dae] layer {i} noise_sd {dae_cfg.noise_sd} "
                f"outside candidate set {GRID_NOISE_SD}")
        if dae_cfg.epochs not in GRID_EPOCHS:
            raise ConfigError(
                f"[dae] layer {i} epochs {dae_cfg.epochs} "
                f"outside candidate set {GRID_EPOCHS}")
    if not _in_grid(cfg.fine_tune.learning_rate, GRID_TRAIN_LR):
        raise ConfigError(
            f"[finetune] learning_rate {cfg.fine_tune.learning_rate} "
            f"outside candidate set {GRID_TRAIN_LR}")


def config_echo(cfg: ExperimentConfig) -> dict:
    """JSON-ready snapshot of the resolved configuration."""
    echo = {
        "source": cfg.source,
        "train_size": cfg.train_size,
        "valid_size": cfg.valid_size,
        "variable_shape": list(cfg.variable_shape) if cfg.variable_shape else None,
        "depths": list(cfg.depths),
        "variants": list(cfg.variants),
        "final_ivs": cfg.final_ivs,
        "seed": cfg.seed,
        "dae": [
            {
                "hidden_units": c.hidden_units,
                "noise_sd": c.noise_sd,
                "learning_rate": c.learning_rate,
                "epochs": c.epochs,
                "loss": c.loss_kind,
                "decoder": c.decoder_activation,
            }
            for c in cfg.dae
        ],
        "ivs": [
            {
                "threshold": c.threshold,
                "max_iterations": c.max_iterations,
                "learning_rate": c.mlr.learning_rate,
                "max_epochs": c.mlr.max_epochs,
                "patience": c.mlr.patience,
                "minibatch_size": c.mlr.minibatch_size,
                "l2": c.mlr.l2,
            }
            for c in cfg.ivs
        ],
        "finetune": {
            "learning_rate": cfg.fine_tune.learning_rate,
            "max_epochs": cfg.fine_tune.max_epochs,
            "patience": cfg.fine_tune.patience,
            "minibatch_size": cfg.fine_tune.minibatch_size,
            "l2": cfg.fine_tune.l2,
        },
    }
    if cfg.source == "synthetic":
        s = cfg.synthetic
        echo["synthetic"] = {
            "relevant": s.num_relevant,
            "irrelevant": s.num_irrelevant,
            "classes": s.num_classes,
            "separation": s.class_separation,
            "feature_noise_sd": s.noise_sd,
            "test_size": s.examples_per_split[2],
        }
    else:
        echo["amat"] = {
            "train": str(cfg.amat_train),
            "valid": str(cfg.amat_valid) if cfg.amat_valid else None,
            "test": str(cfg.amat_test) if cfg.amat_test else None,
            "labels": "zero" if cfg.zero_based_labels else "one",
        }
    return echo
