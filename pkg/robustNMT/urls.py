"""
URL configuration for robustNMT project.
"""

from django.contrib import admin
from django.urls import path, include
from drf_spectacular.views import SpectacularAPIView, SpectacularSwaggerView

urlpatterns = [
    # Admin
    path("admin/", admin.site.urls),
    # API Documentation
    path("api/schema/", SpectacularAPIView.as_view(), name="schema"),
    path("api/docs/", SpectacularSwaggerView.as_view(url_name="schema"), name="swagger-ui"),
    # API routes
    path("api/runs/", include("Training.urls")),
    path("api/evaluations/", include("Evaluation.urls")),
]

# Customize admin site
admin.site.site_header = "robustNMT Administration"
admin.site.site_title = "robustNMT Admin"
admin.site.index_title = "Training runs and evaluations"
