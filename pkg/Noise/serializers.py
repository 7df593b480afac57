"""
Serializers for noise-channel configuration files
"""

from pathlib import Path
from rest_framework import serializers

from Common.validators import validate_probability
from .channel import NoiseConfig, read_confusion_table


class NoiseConfigSerializer(serializers.Serializer):
    """Validates P_DELETE / P_REPEAT / P_SUBSTITUTE / P_INSERT / CONFUSION_TABLE / SEED"""

    p_delete = serializers.FloatField(default=0.0, validators=[validate_probability])
    p_repeat = serializers.FloatField(default=0.0, validators=[validate_probability])
    p_substitute = serializers.FloatField(default=0.0, validators=[validate_probability])
    p_insert = serializers.FloatField(default=0.0, validators=[validate_probability])
    confusion_table = serializers.CharField(required=False, allow_blank=True, default="")
    seed = serializers.IntegerField(required=False, allow_null=True, default=None)

    def validate_confusion_table(self, value):
        if value and not Path(value).is_file():
            raise serializers.ValidationError(f"Confusion table not found: {value}")
        return value

    def validate(self, attrs):
        if attrs["p_delete"] + attrs["p_repeat"] + attrs["p_substitute"] > 1.0:
            raise serializers.ValidationError(
                "P_DELETE + P_REPEAT + P_SUBSTITUTE must not exceed 1"
            )
        return attrs

    def create(self, validated_data):
        path = validated_data.pop("confusion_table")
        seed = validated_data.pop("seed")
        return NoiseConfig(
            confusion_table=read_confusion_table(path) if path else None,
            seed=0 if seed is None else seed,
            **validated_data,
        )
