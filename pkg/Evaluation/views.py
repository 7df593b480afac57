"""
Read-only API over BLEU evaluation records
"""

from django_filters.rest_framework import DjangoFilterBackend
from drf_spectacular.utils import extend_schema, extend_schema_view
from rest_framework import filters, viewsets

from .models import EvalReport
from .serializers import EvalReportSerializer


@extend_schema_view(
    list=extend_schema(
        summary="List BLEU evaluations",
        description="Filter by run, dataset, condition (clean/noisy), alpha and beta",
        tags=["Evaluations"],
    ),
    retrieve=extend_schema(
        summary="Get evaluation details",
        tags=["Evaluations"],
    ),
)
class EvalReportViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = EvalReport.objects.select_related("run")
    serializer_class = EvalReportSerializer
    filter_backends = [DjangoFilterBackend, filters.OrderingFilter]
    filterset_fields = ["run", "dataset", "condition", "alpha", "beta", "step"]
    ordering_fields = ["step", "bleu", "created_at"]
