"""
Serializers for model configuration keys
"""

from rest_framework import serializers

from Common.validators import validate_fraction
from .config import ModelConfig


class ModelConfigSerializer(serializers.Serializer):
    """
    NUM_LAYERS / D_MODEL / FFN_SIZE / NUM_HEADS / DROPOUT / MAX_POSITIONS /
    LABEL_SMOOTHING; the vocabulary sizes come in the serializer context
    """

    num_layers = serializers.IntegerField(default=2, min_value=1)
    d_model = serializers.IntegerField(default=128, min_value=1)
    ffn_size = serializers.IntegerField(default=256, min_value=1)
    num_heads = serializers.IntegerField(default=4, min_value=1)
    dropout = serializers.FloatField(default=0.1, validators=[validate_fraction])
    max_positions = serializers.IntegerField(default=128, min_value=2)
    label_smoothing = serializers.FloatField(default=0.1, validators=[validate_fraction])

    def validate(self, attrs):
        if attrs["d_model"] % attrs["num_heads"]:
            raise serializers.ValidationError(
                {"d_model": "D_MODEL must be divisible by NUM_HEADS"}
            )
        return attrs

    def create(self, validated_data):
        return ModelConfig(
            source_vocab_size=self.context["source_vocab_size"],
            target_vocab_size=self.context["target_vocab_size"],
            **validated_data,
        )
