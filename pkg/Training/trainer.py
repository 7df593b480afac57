"""
Joint training over parallel data and transcription pairs

Every step draws a parallel batch for l_normal; on transcription steps it also
draws a transcription batch for l_enc and l_dec. All weighted terms share one
backward pass: the discriminator sees encodings through gradient reversal, so
the discriminator and the encoder are updated in tandem by the same optimizer
step. Zero-weighted terms are still computed for the loss log, in eval mode
without gradients, so they draw no random numbers and leave the update
untouched.
"""

import math
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import torch
from django.core.exceptions import ValidationError
from torch.optim.lr_scheduler import LambdaLR

from Common.exceptions import PipelineAbort
from Common.validators import validate_nonempty
from Noise.embedding import INTERPRETATIONS, STD
from Text.vocabulary import encode_ids
from Translation.batching import pad_batch, target_tensors_from_ids
from Translation.checkpoints import checkpoint_path, save_checkpoint
from Translation.gradient_reversal import grad_reverse
from Translation.modeling import EncoderOutput
from .batching import PARALLEL_STREAM, TRANSCRIPTION_STREAM, batch_indices
from .losses import (
    LossBreakdown,
    LossWeights,
    adversarial_loss,
    consistency_loss,
    nll_loss,
    pseudo_reference,
    total_loss,
)

logger = logging.getLogger(__name__)

ASR_NOISE = "asr"
GAUSSIAN_NOISE = "gaussian"
NOISE_SOURCES = (ASR_NOISE, GAUSSIAN_NOISE)

LOSS_LOG = "loss.log"
LOSS_LOG_HEADER = ("step", "l_normal", "l_enc", "l_dec", "total")


class NonFiniteLossError(PipelineAbort):
    def __init__(self, component, step, value):
        super().__init__(f"Non-finite {component} ({value}) at step {step}")
        self.component = component
        self.step = step


@dataclass(frozen=True)
class TrainingConfig:
    steps: int = 1000
    parallel_batch_size: int = 32
    transcription_batch_size: int = 32
    learning_rate: float = 1e-3
    warmup_steps: int = 200
    adam_beta1: float = 0.9
    adam_beta2: float = 0.98
    adam_eps: float = 1e-9
    weights: LossWeights = field(default_factory=LossWeights)
    transcription_every: int = 1
    noise_source: str = ASR_NOISE
    sigma: float = 0.01
    sigma_interpretation: str = STD
    checkpoint_every: int = 0
    log_every: int = 10
    max_decode_len: int = 0
    seed: int = 1234

    def __post_init__(self):
        for name in ("steps", "parallel_batch_size", "transcription_batch_size",
                     "warmup_steps", "transcription_every", "log_every"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise_source not in NOISE_SOURCES:
            raise ValidationError(f"noise_source must be one of {NOISE_SOURCES}")
        if self.sigma_interpretation not in INTERPRETATIONS:
            raise ValidationError(f"sigma_interpretation must be one of {INTERPRETATIONS}")


def inverse_sqrt_schedule(warmup_steps):
    """LR factor: linear warmup to 1 at warmup_steps, then 1/sqrt decay"""

    def factor(completed):
        step = completed + 1
        return min(step / warmup_steps, math.sqrt(warmup_steps / step))

    return factor


@contextmanager
def evaluation_mode(*modules):
    previous = [module.training for module in modules]
    for module in modules:
        module.eval()
    try:
        yield
    finally:
        for module, mode in zip(modules, previous):
            module.train(mode)


def init_from_baseline(model, checkpoint):
    """
    Load encoder/decoder parameters from a baseline checkpoint

    The discriminator is not touched: it keeps its fresh, seeded initialization.
    """
    if checkpoint.config != model.config:
        raise ValidationError(
            f"Baseline config {checkpoint.config} does not match model config {model.config}"
        )
    model.load_state_dict(checkpoint.model_state)
    logger.info(f"Initialized model from baseline checkpoint (step {checkpoint.step})")
    return model


def drop_unfit(encoded, limits, what):
    """
    Keep the encoded pairs whose sides are nonempty and within their position limits

    Args:
        encoded (list): tuples of id lists
        limits (tuple): maximum length per side
        what (str): name used in the log message
    """
    kept = [
        pair for pair in encoded
        if all(0 < len(ids) <= limit for ids, limit in zip(pair, limits))
    ]
    dropped = len(encoded) - len(kept)
    if dropped:
        logger.warning(
            f"Dropped {dropped} of {len(encoded)} {what} that are empty or exceed {limits} tokens"
        )
    return kept


def encode_transcriptions(transcription_pairs, source_vocab, max_source):
    """(manual ids, auto ids) for every pair that fits the encoder"""
    return drop_unfit(
        [
            (encode_ids(pair.manual, source_vocab), encode_ids(pair.auto, source_vocab))
            for pair in transcription_pairs
        ],
        (max_source, max_source),
        "transcription pairs",
    )


class Trainer:
    """
    Owns the model, the discriminator, the optimizer and the step counter
    """

    def __init__(
        self,
        model,
        discriminator,
        config,
        source_vocab,
        target_vocab,
        parallel_pairs,
        transcription_pairs=(),
    ):
        self.model = model
        self.discriminator = discriminator
        self.config = config
        self.weights = config.weights
        self.source_vocab = source_vocab
        self.target_vocab = target_vocab
        self.step = 0

        max_source = model.config.max_positions
        max_target = max_source - 1
        self.parallel = drop_unfit(
            [
                (encode_ids(pair.source, source_vocab), encode_ids(pair.target, target_vocab))
                for pair in parallel_pairs
            ],
            (max_source, max_target),
            "parallel pairs",
        )
        self.transcriptions = encode_transcriptions(transcription_pairs, source_vocab, max_source)
        validate_nonempty(self.parallel, "parallel corpus")
        if config.noise_source == ASR_NOISE and not self.weights.is_plain:
            validate_nonempty(self.transcriptions, "transcription pairs")

        self.optimizer = torch.optim.Adam(
            list(model.parameters()) + list(discriminator.parameters()),
            lr=config.learning_rate,
            betas=(config.adam_beta1, config.adam_beta2),
            eps=config.adam_eps,
        )
        self.scheduler = LambdaLR(self.optimizer, inverse_sqrt_schedule(config.warmup_steps))

    @property
    def label_smoothing(self):
        return self.model.config.label_smoothing

    def parallel_batch(self, step):
        rows = batch_indices(
            self.config.seed, PARALLEL_STREAM, step, len(self.parallel),
            self.config.parallel_batch_size,
        )
        source = pad_batch([self.parallel[i][0] for i in rows])
        prefix, gold = target_tensors_from_ids([self.parallel[i][1] for i in rows])
        return source, prefix, gold

    def transcription_batch(self, step):
        rows = batch_indices(
            self.config.seed, TRANSCRIPTION_STREAM, step, len(self.transcriptions),
            self.config.transcription_batch_size,
        )
        manual = pad_batch([self.transcriptions[i][0] for i in rows])
        auto = pad_batch([self.transcriptions[i][1] for i in rows])
        return manual, auto

    def is_transcription_step(self, step):
        if self.config.noise_source == ASR_NOISE and not self.transcriptions:
            return False
        return step % self.config.transcription_every == 0

    def _decoder_consistency(self, clean_ids, h_noisy, prefix, gold):
        if self.config.noise_source == GAUSSIAN_NOISE:
            logits = self.model.decoder_logits(h_noisy, prefix)
            return nll_loss(logits, gold, self.label_smoothing), 0

        y_hat = pseudo_reference(self.model, clean_ids, self.config.max_decode_len or None)
        keep = [row for row, ids in enumerate(y_hat) if ids]
        skipped = len(y_hat) - len(keep)
        if not keep:
            return torch.zeros((), dtype=h_noisy.states.dtype), skipped

        index = torch.tensor(keep, dtype=torch.long)
        h_kept = EncoderOutput(h_noisy.states[index], h_noisy.mask[index])
        kept_targets = [y_hat[row] for row in keep]
        return consistency_loss(self.model, h_kept, kept_targets, self.label_smoothing), skipped

    def _consistency_terms(self, step, source, prefix, gold, h_source, terms):
        if self.config.noise_source == GAUSSIAN_NOISE:
            clean_ids = noisy_ids = source
            h_clean = h_source
            noise = self.config.sigma
        else:
            clean_ids, noisy_ids = self.transcription_batch(step)
            h_clean = None
            noise = 0.0

        h_noisy = self.model.encode(
            noisy_ids,
            embedding_noise=noise,
            noise_interpretation=self.config.sigma_interpretation,
        )
        values, skipped = {}, 0
        if "l_enc" in terms:
            if h_clean is None:
                h_clean = self.model.encode(clean_ids)
            values["l_enc"] = adversarial_loss(
                self.discriminator(grad_reverse(h_clean)),
                self.discriminator(grad_reverse(h_noisy)),
            )
        if "l_dec" in terms:
            values["l_dec"], skipped = self._decoder_consistency(clean_ids, h_noisy, prefix, gold)
        return values, skipped

    def train_step(self, parallel_batch=None):
        """
        One optimizer update on the weighted total

        Returns:
            LossBreakdown

        Raises:
            NonFiniteLossError: naming the first non-finite component
        """
        self.step += 1
        step = self.step
        self.model.train()
        self.discriminator.train()

        source, prefix, gold = parallel_batch or self.parallel_batch(step)
        h_source = self.model.encode(source)
        l_normal = nll_loss(self.model.decoder_logits(h_source, prefix), gold, self.label_smoothing)

        values = {"l_enc": torch.zeros(()), "l_dec": torch.zeros(())}
        skipped = 0
        if self.is_transcription_step(step):
            weighted = [name for name, w in (("l_enc", self.weights.alpha), ("l_dec", self.weights.beta)) if w]
            logged = [name for name in ("l_enc", "l_dec") if name not in weighted]
            if weighted:
                computed, skipped = self._consistency_terms(
                    step, source, prefix, gold, h_source, weighted
                )
                values.update(computed)
            if logged:
                with torch.no_grad(), evaluation_mode(self.model, self.discriminator):
                    computed, logged_skipped = self._consistency_terms(
                        step, source, prefix, gold, None, logged
                    )
                values.update(computed)
                skipped = skipped or logged_skipped

        total = total_loss(l_normal, values["l_enc"], values["l_dec"], self.weights)
        breakdown = LossBreakdown(
            step=step,
            l_normal=l_normal.item(),
            l_enc=values["l_enc"].item(),
            l_dec=values["l_dec"].item(),
            total=total.item(),
            skipped_pseudo_references=skipped,
        )
        for component in ("l_normal", "l_enc", "l_dec", "total"):
            value = getattr(breakdown, component)
            if not math.isfinite(value):
                logger.error(f"Aborting training: non-finite {component} at step {step}")
                raise NonFiniteLossError(component, step, value)

        self.optimizer.zero_grad(set_to_none=True)
        total.backward()
        self.optimizer.step()
        self.scheduler.step()
        return breakdown

    def save(self, run_dir):
        return save_checkpoint(
            checkpoint_path(run_dir, self.step),
            self.model,
            self.source_vocab,
            self.target_vocab,
            step=self.step,
            discriminator=self.discriminator,
            optimizer=self.optimizer,
            scheduler=self.scheduler,
            extra={
                "alpha": self.weights.alpha,
                "beta": self.weights.beta,
                "noise_source": self.config.noise_source,
                "seed": self.config.seed,
            },
        )

    def fit(self, run_dir, on_checkpoint=None):
        """
        Run the remaining steps, writing the loss log and checkpoints

        Args:
            run_dir (Path): created if missing
            on_checkpoint (callable): called as on_checkpoint(step, path, trainer)

        Returns:
            list: LossBreakdown per step
        """
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        history = []

        with open(run_dir / LOSS_LOG, "w", encoding="utf-8") as handle:
            handle.write("\t".join(LOSS_LOG_HEADER) + "\n")
            while self.step < self.config.steps:
                breakdown = self.train_step()
                history.append(breakdown)
                handle.write(format_breakdown(breakdown) + "\n")
                handle.flush()

                step = breakdown.step
                if breakdown.skipped_pseudo_references:
                    logger.info(
                        f"Step {step}: skipped {breakdown.skipped_pseudo_references} "
                        f"empty pseudo-references"
                    )
                if step % self.config.log_every == 0:
                    logger.info(
                        f"Step {step}: l_normal={breakdown.l_normal:.4f} "
                        f"l_enc={breakdown.l_enc:.4f} l_dec={breakdown.l_dec:.4f} "
                        f"total={breakdown.total:.4f}"
                    )

                every = self.config.checkpoint_every
                if (every and step % every == 0) or step == self.config.steps:
                    path = self.save(run_dir)
                    if on_checkpoint is not None:
                        on_checkpoint(step, path, self)
        return history


def format_breakdown(breakdown):
    return "\t".join(
        [str(breakdown.step)]
        + [
            f"{value:.10g}"
            for value in (breakdown.l_normal, breakdown.l_enc, breakdown.l_dec, breakdown.total)
        ]
    )


def read_loss_log(path):
    """Parse a loss log back into LossBreakdown records"""
    records = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n").split("\t")
        if tuple(header) != LOSS_LOG_HEADER:
            raise ValidationError(f"{path} is not a loss log (header {header})")
        for line in handle:
            if not line.strip():
                continue
            step, l_normal, l_enc, l_dec, total = line.rstrip("\n").split("\t")
            records.append(
                LossBreakdown(int(step), float(l_normal), float(l_enc), float(l_dec), float(total))
            )
    return records


@torch.no_grad()
def discriminator_accuracy(model, discriminator, transcription_pairs, source_vocab, batch_size=64):
    """
    Held-out accuracy: manual scored above 0.5, automatic scored below 0.5

    Returns:
        float: in [0, 1]; 0.5 is chance
    """
    validate_nonempty(transcription_pairs, "transcription pairs")
    encoded = encode_transcriptions(transcription_pairs, source_vocab, model.config.max_positions)
    validate_nonempty(encoded, "transcription pairs within max_positions")
    correct = 0
    with evaluation_mode(model, discriminator):
        for start in range(0, len(encoded), batch_size):
            chunk = encoded[start : start + batch_size]
            manual = pad_batch([manual_ids for manual_ids, _ in chunk])
            auto = pad_batch([auto_ids for _, auto_ids in chunk])
            correct += int((discriminator(model.encode(manual)) > 0.5).sum())
            correct += int((discriminator(model.encode(auto)) < 0.5).sum())
    return correct / (2 * len(encoded))
