"""
Serializers for Evaluation app
"""

from rest_framework import serializers
from .models import EvalReport


class EvalReportSerializer(serializers.ModelSerializer):
    """Serializer for BLEU evaluation records (read-only)"""

    run_name = serializers.CharField(source="run.name", read_only=True, allow_null=True)

    class Meta:
        model = EvalReport
        fields = [
            "id",
            "run",
            "run_name",
            "dataset",
            "condition",
            "step",
            "bleu",
            "precisions",
            "brevity_penalty",
            "hypothesis_length",
            "reference_length",
            "alpha",
            "beta",
            "checkpoint",
            "created_at",
        ]
        read_only_fields = fields
