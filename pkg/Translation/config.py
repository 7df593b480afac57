"""
Model hyper-parameters
"""

from dataclasses import asdict, dataclass
from django.core.exceptions import ValidationError

from Common.validators import validate_fraction


@dataclass(frozen=True)
class ModelConfig:
    """Transformer encoder-decoder geometry; desk-scale defaults"""

    num_layers: int = 2
    d_model: int = 128
    ffn_size: int = 256
    num_heads: int = 4
    dropout: float = 0.1
    max_positions: int = 128
    source_vocab_size: int = 4
    target_vocab_size: int = 4
    label_smoothing: float = 0.1

    def __post_init__(self):
        for name in ("num_layers", "d_model", "ffn_size", "num_heads", "max_positions"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.d_model % self.num_heads:
            raise ValidationError(
                f"d_model ({self.d_model}) must be divisible by num_heads ({self.num_heads})"
            )
        # reserved ids 0-3 are always present
        if self.source_vocab_size < 4 or self.target_vocab_size < 4:
            raise ValidationError("Vocabulary sizes must include the 4 reserved tokens")
        validate_fraction(self.dropout)
        validate_fraction(self.label_smoothing)

    def as_dict(self):
        return asdict(self)
