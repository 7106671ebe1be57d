"""
URL configuration for the phase metrology project.

Only the admin is routed: persisted sweep runs, their records and scaling
fits are browsed there read-only.
"""
from django.contrib import admin
from django.urls import path

admin.site.site_header = "Functional phase metrology"
admin.site.site_title = "Phase metrology sweeps"
admin.site.index_title = "Persisted sweeps"

urlpatterns = [
    path("admin/", admin.site.urls),
]
