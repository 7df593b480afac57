from django.contrib import admin
from .models import TrainingRun


@admin.register(TrainingRun)
class TrainingRunAdmin(admin.ModelAdmin):
    list_display = [
        "name",
        "status",
        "alpha",
        "beta",
        "noise_source",
        "steps_completed",
        "final_total",
        "created_at",
    ]
    list_filter = ["status", "noise_source", "created_at"]
    search_fields = ["name", "run_dir"]
    readonly_fields = ["id", "created_at", "updated_at", "completed_at"]

    fieldsets = (
        ("Run", {"fields": ("id", "name", "run_dir", "status", "error_message")}),
        ("Objective", {"fields": ("alpha", "beta", "noise_source", "seed", "init_checkpoint")}),
        (
            "Progress",
            {
                "fields": (
                    "steps",
                    "steps_completed",
                    "final_l_normal",
                    "final_l_enc",
                    "final_l_dec",
                    "final_total",
                )
            },
        ),
        ("Timestamps", {"fields": ("created_at", "updated_at", "completed_at")}),
    )
