"""
Checkpoint files

A checkpoint is a torch.save'd dict holding the model config, model
parameters, discriminator parameters (separate key, may be absent), optimizer
and scheduler state, the step counter and both vocabularies.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import torch
from django.conf import settings
from django.core.exceptions import ValidationError

from Text.vocabulary import Vocabulary
from .config import ModelConfig
from .modeling import Discriminator, TranslationModel

logger = logging.getLogger(__name__)


@dataclass
class Checkpoint:
    config: ModelConfig
    model_state: dict
    source_vocab: Vocabulary
    target_vocab: Vocabulary
    step: int = 0
    discriminator_state: Optional[dict] = None
    optimizer_state: Optional[dict] = None
    scheduler_state: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    @property
    def has_discriminator(self):
        return self.discriminator_state is not None

    def build_model(self):
        """TranslationModel with the stored parameters, in eval mode"""
        model = TranslationModel(self.config)
        model.load_state_dict(self.model_state)
        model.eval()
        return model

    def build_discriminator(self):
        discriminator = Discriminator(self.config)
        if self.discriminator_state is not None:
            discriminator.load_state_dict(self.discriminator_state)
        return discriminator


def checkpoint_path(run_dir, step):
    return Path(run_dir) / f"{settings.CHECKPOINT_PREFIX}{step}"


def list_checkpoints(run_dir):
    """(step, path) pairs sorted by step"""
    prefix = settings.CHECKPOINT_PREFIX
    found = []
    for path in Path(run_dir).glob(f"{prefix}*"):
        suffix = path.name[len(prefix):]
        if suffix.isdigit():
            found.append((int(suffix), path))
    return sorted(found)


def latest_checkpoint(run_dir):
    checkpoints = list_checkpoints(run_dir)
    if not checkpoints:
        raise ValidationError(f"No checkpoints in {run_dir}")
    return checkpoints[-1][1]


def save_checkpoint(
    path,
    model,
    source_vocab,
    target_vocab,
    step=0,
    discriminator=None,
    optimizer=None,
    scheduler=None,
    extra=None,
):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": model.config.as_dict(),
        "model": model.state_dict(),
        "discriminator": discriminator.state_dict() if discriminator is not None else None,
        "optimizer": optimizer.state_dict() if optimizer is not None else None,
        "scheduler": scheduler.state_dict() if scheduler is not None else None,
        "step": step,
        "source_vocab": list(source_vocab.tokens),
        "target_vocab": list(target_vocab.tokens),
        "extra": dict(extra or {}),
    }
    torch.save(payload, path)
    logger.info(f"Saved checkpoint {path} (step {step})")
    return path


def load_checkpoint(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)

    checkpoint = Checkpoint(
        config=ModelConfig(**payload["config"]),
        model_state=payload["model"],
        source_vocab=Vocabulary(payload["source_vocab"]),
        target_vocab=Vocabulary(payload["target_vocab"]),
        step=payload.get("step", 0),
        discriminator_state=payload.get("discriminator"),
        optimizer_state=payload.get("optimizer"),
        scheduler_state=payload.get("scheduler"),
        extra=payload.get("extra") or {},
    )
    if (len(checkpoint.source_vocab), len(checkpoint.target_vocab)) != (
        checkpoint.config.source_vocab_size,
        checkpoint.config.target_vocab_size,
    ):
        raise ValidationError(f"{path}: vocabulary sizes do not match the model config")
    return checkpoint


def strip_discriminator(source, target):
    """Copy a checkpoint without discriminator parameters"""
    payload = torch.load(Path(source), map_location="cpu", weights_only=True)
    payload["discriminator"] = None
    torch.save(payload, Path(target))
    return Path(target)
