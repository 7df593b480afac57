"""
Run registry for training runs
"""

from django.db import models
from django.utils import timezone


class TrainingRun(models.Model):
    """
    One invocation of the train command
    """

    STATUS_CHOICES = [
        ("running", "Running"),
        ("completed", "Completed"),
        ("failed", "Failed"),
    ]

    NOISE_SOURCE_CHOICES = [
        ("asr", "ASR transcripts"),
        ("gaussian", "Gaussian embedding noise"),
    ]

    name = models.CharField(max_length=200)
    run_dir = models.CharField(max_length=500, unique=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default="running")

    # Objective
    alpha = models.FloatField(default=0.0)
    beta = models.FloatField(default=0.0)
    noise_source = models.CharField(
        max_length=20, choices=NOISE_SOURCE_CHOICES, default="asr"
    )
    seed = models.IntegerField()
    steps = models.PositiveIntegerField(help_text="Configured number of steps")
    init_checkpoint = models.CharField(max_length=500, blank=True)

    # Progress
    steps_completed = models.PositiveIntegerField(default=0)
    final_l_normal = models.FloatField(null=True, blank=True)
    final_l_enc = models.FloatField(null=True, blank=True)
    final_l_dec = models.FloatField(null=True, blank=True)
    final_total = models.FloatField(null=True, blank=True)
    error_message = models.TextField(blank=True)

    # Timestamps
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-created_at"]
        indexes = [
            models.Index(fields=["status"], name="trainingrun_status_idx"),
            models.Index(fields=["alpha", "beta"], name="trainingrun_weights_idx"),
        ]

    def __str__(self):
        return f"{self.name} (alpha={self.alpha}, beta={self.beta}, {self.status})"

    @property
    def duration_seconds(self):
        if self.completed_at is None:
            return None
        return (self.completed_at - self.created_at).total_seconds()

    def mark_completed(self, breakdown):
        self.status = "completed"
        self.steps_completed = breakdown.step
        self.final_l_normal = breakdown.l_normal
        self.final_l_enc = breakdown.l_enc
        self.final_l_dec = breakdown.l_dec
        self.final_total = breakdown.total
        self.completed_at = timezone.now()
        self.save()

    def mark_failed(self, message, steps_completed=0):
        self.status = "failed"
        self.error_message = message
        self.steps_completed = steps_completed
        self.completed_at = timezone.now()
        self.save()
