from django.contrib import admin
from .models import EvalReport


@admin.register(EvalReport)
class EvalReportAdmin(admin.ModelAdmin):
    list_display = ["dataset", "condition", "step", "bleu", "alpha", "beta", "run", "created_at"]
    list_filter = ["condition", "dataset", "alpha", "beta"]
    search_fields = ["dataset", "run__name", "checkpoint"]
    readonly_fields = ["id", "created_at"]
