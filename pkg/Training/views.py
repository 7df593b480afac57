"""
Read-only API over the training run registry
"""

from pathlib import Path
from django_filters.rest_framework import DjangoFilterBackend
from drf_spectacular.utils import extend_schema, extend_schema_view
from rest_framework import filters, status, viewsets
from rest_framework.decorators import action
from rest_framework.response import Response

from .models import TrainingRun
from .serializers import TrainingRunSerializer
from .trainer import LOSS_LOG, read_loss_log


@extend_schema_view(
    list=extend_schema(
        summary="List training runs",
        description="Training runs with their loss weights, status and final losses",
        tags=["Training Runs"],
    ),
    retrieve=extend_schema(
        summary="Get training run details",
        tags=["Training Runs"],
    ),
)
class TrainingRunViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = TrainingRun.objects.all()
    serializer_class = TrainingRunSerializer
    filter_backends = [DjangoFilterBackend, filters.SearchFilter, filters.OrderingFilter]
    filterset_fields = ["status", "noise_source", "alpha", "beta"]
    search_fields = ["name"]
    ordering_fields = ["created_at", "final_total", "alpha", "beta"]

    @extend_schema(
        summary="Loss curve of a run",
        description="Per-step l_normal, l_enc, l_dec and total from the run's loss log",
        tags=["Training Runs"],
    )
    @action(detail=True, methods=["get"])
    def losses(self, request, pk=None):
        run = self.get_object()
        path = Path(run.run_dir) / LOSS_LOG
        if not path.is_file():
            return Response({"detail": "Loss log not found"}, status=status.HTTP_404_NOT_FOUND)
        return Response(
            [
                {
                    "step": record.step,
                    "l_normal": record.l_normal,
                    "l_enc": record.l_enc,
                    "l_dec": record.l_dec,
                    "total": record.total,
                }
                for record in read_loss_log(path)
            ]
        )
