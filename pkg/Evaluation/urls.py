"""
URL configuration for Evaluation app
"""

from django.urls import path, include
from rest_framework.routers import DefaultRouter
from .views import EvalReportViewSet

app_name = "evaluation"

router = DefaultRouter()
router.register(r"", EvalReportViewSet, basename="evaluation")

urlpatterns = [
    path("", include(router.urls)),
]
