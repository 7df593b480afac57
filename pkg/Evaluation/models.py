"""
BLEU evaluation records
"""

from django.db import models
from Training.models import TrainingRun


class EvalReport(models.Model):
    """
    BLEU of one checkpoint on one dataset under one input condition
    """

    CONDITION_CHOICES = [
        ("clean", "Clean reference transcripts"),
        ("noisy", "ASR transcripts"),
    ]

    run = models.ForeignKey(
        TrainingRun,
        on_delete=models.CASCADE,
        related_name="evaluations",
        null=True,
        blank=True,
    )
    dataset = models.CharField(max_length=200, help_text="Dataset identifier, e.g. dev")
    condition = models.CharField(max_length=10, choices=CONDITION_CHOICES)
    step = models.PositiveIntegerField(default=0)

    # Score
    bleu = models.FloatField()
    precisions = models.JSONField(default=list, help_text="n-gram precisions p1..pN")
    brevity_penalty = models.FloatField()
    hypothesis_length = models.PositiveIntegerField(default=0)
    reference_length = models.PositiveIntegerField(default=0)

    # Loss weights of the evaluated model
    alpha = models.FloatField(default=0.0)
    beta = models.FloatField(default=0.0)

    checkpoint = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["condition", "alpha", "beta", "step"]
        indexes = [
            models.Index(fields=["dataset", "condition"], name="evalreport_dataset_idx"),
        ]

    def __str__(self):
        return f"{self.dataset}/{self.condition} step {self.step}: BLEU {self.bleu:.2f}"

    @classmethod
    def record(cls, score, dataset, condition, step=0, run=None, alpha=0.0, beta=0.0, checkpoint=""):
        """Store a BleuScore"""
        return cls.objects.create(
            run=run,
            dataset=dataset,
            condition=condition,
            step=step,
            bleu=score.score,
            precisions=list(score.precisions),
            brevity_penalty=score.brevity_penalty,
            hypothesis_length=score.hypothesis_length,
            reference_length=score.reference_length,
            alpha=alpha,
            beta=beta,
            checkpoint=str(checkpoint),
        )
