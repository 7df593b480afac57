"""
Serializers for training configuration files and the run registry API
"""

from django.conf import settings
from rest_framework import serializers

from Common.validators import validate_non_negative
from Noise.embedding import INTERPRETATIONS, STD
from .data import TrainingSetup
from .losses import LossWeights
from .models import TrainingRun
from .trainer import ASR_NOISE, NOISE_SOURCES, TrainingConfig


class TrainingConfigSerializer(serializers.Serializer):
    """
    Keys of a training config file (upper-case in the file):
    data paths, schedule, batch sizes, loss weights and noise source
    """

    parallel_source = serializers.CharField()
    parallel_target = serializers.CharField()
    transcriptions = serializers.CharField(required=False, allow_blank=True, default="")
    init_checkpoint = serializers.CharField(required=False, allow_blank=True, default="")
    dev_source = serializers.CharField(required=False, allow_blank=True, default="")
    dev_noisy_source = serializers.CharField(required=False, allow_blank=True, default="")
    dev_target = serializers.CharField(required=False, allow_blank=True, default="")

    steps = serializers.IntegerField(default=1000, min_value=1)
    parallel_batch_size = serializers.IntegerField(default=32, min_value=1)
    transcription_batch_size = serializers.IntegerField(default=32, min_value=1)
    learning_rate = serializers.FloatField(default=1e-3, min_value=0.0)
    warmup_steps = serializers.IntegerField(default=200, min_value=1)
    alpha = serializers.FloatField(default=0.0, validators=[validate_non_negative])
    beta = serializers.FloatField(default=0.0, validators=[validate_non_negative])
    transcription_every = serializers.IntegerField(default=1, min_value=1)
    noise_source = serializers.ChoiceField(choices=NOISE_SOURCES, default=ASR_NOISE)
    sigma = serializers.FloatField(default=0.01, validators=[validate_non_negative])
    sigma_interpretation = serializers.ChoiceField(choices=INTERPRETATIONS, default=STD)
    checkpoint_every = serializers.IntegerField(default=0, min_value=0)
    log_every = serializers.IntegerField(default=10, min_value=1)
    max_decode_len = serializers.IntegerField(default=0, min_value=0)
    min_freq = serializers.IntegerField(default=1, min_value=1)
    max_vocab_size = serializers.IntegerField(default=10000, min_value=1)
    seed = serializers.IntegerField(default=settings.DEFAULT_SEED)

    def validate(self, attrs):
        weighted = attrs["alpha"] > 0 or attrs["beta"] > 0
        if weighted and attrs["noise_source"] == ASR_NOISE and not attrs["transcriptions"]:
            raise serializers.ValidationError(
                {"transcriptions": "TRANSCRIPTIONS is required when ALPHA or BETA is positive"}
            )
        dev = [attrs["dev_source"], attrs["dev_target"]]
        if any(dev) and not all(dev):
            raise serializers.ValidationError(
                {"dev_target": "DEV_SOURCE and DEV_TARGET must be given together"}
            )
        return attrs

    def create(self, validated_data):
        return TrainingSetup(
            config=self.to_config(),
            parallel_source=validated_data["parallel_source"],
            parallel_target=validated_data["parallel_target"],
            transcriptions=validated_data["transcriptions"],
            init_checkpoint=validated_data["init_checkpoint"],
            dev_source=validated_data["dev_source"],
            dev_noisy_source=validated_data["dev_noisy_source"],
            dev_target=validated_data["dev_target"],
            min_freq=validated_data["min_freq"],
            max_vocab_size=validated_data["max_vocab_size"],
        )

    def to_config(self):
        data = self.validated_data
        return TrainingConfig(
            steps=data["steps"],
            parallel_batch_size=data["parallel_batch_size"],
            transcription_batch_size=data["transcription_batch_size"],
            learning_rate=data["learning_rate"],
            warmup_steps=data["warmup_steps"],
            weights=LossWeights(data["alpha"], data["beta"]),
            transcription_every=data["transcription_every"],
            noise_source=data["noise_source"],
            sigma=data["sigma"],
            sigma_interpretation=data["sigma_interpretation"],
            checkpoint_every=data["checkpoint_every"],
            log_every=data["log_every"],
            max_decode_len=data["max_decode_len"],
            seed=data["seed"],
        )


class TrainingRunSerializer(serializers.ModelSerializer):
    """Serializer for the run registry (read-only)"""

    duration_seconds = serializers.ReadOnlyField()

    class Meta:
        model = TrainingRun
        fields = [
            "id",
            "name",
            "run_dir",
            "status",
            "alpha",
            "beta",
            "noise_source",
            "seed",
            "steps",
            "steps_completed",
            "final_l_normal",
            "final_l_enc",
            "final_l_dec",
            "final_total",
            "error_message",
            "created_at",
            "completed_at",
            "duration_seconds",
        ]
        read_only_fields = fields
