"""
URL configuration for Training app
"""

from django.urls import path, include
from rest_framework.routers import DefaultRouter
from .views import TrainingRunViewSet

app_name = "training"

router = DefaultRouter()
router.register(r"", TrainingRunViewSet, basename="run")

urlpatterns = [
    path("", include(router.urls)),
]
