"""
Django admin configuration for persisted sweeps.

Sweeps are produced by ``manage.py sweep --persist`` and are read-only here.
"""
from django.contrib import admin

from phase_app.models import ScalingFitResult, SweepRecord, SweepRun


class ReadOnlyAdmin(admin.ModelAdmin):
    def has_add_permission(self, request) -> bool:
        return False

    def has_change_permission(self, request, obj=None) -> bool:
        return False


class ScalingFitInline(admin.TabularInline):
    model = ScalingFitResult
    fields = ["label", "exponent", "standard_error", "exponent_sq"]
    readonly_fields = fields
    extra = 0
    can_delete = False


@admin.register(SweepRun)
class SweepRunAdmin(ReadOnlyAdmin):
    list_display = ["id", "method", "regime", "q", "M", "seed", "created_at"]
    list_filter = ["method", "regime", "created_at"]
    search_fields = ["seed"]
    readonly_fields = ["method", "regime", "q", "M", "seed", "config", "created_at"]
    inlines = [ScalingFitInline]


@admin.register(SweepRecord)
class SweepRecordAdmin(ReadOnlyAdmin):
    list_display = ["id", "run", "N", "trial", "mspe", "particles_used", "flags"]
    list_filter = ["run__method", "run__regime", "N"]
    search_fields = ["flags"]
    raw_id_fields = ["run"]


@admin.register(ScalingFitResult)
class ScalingFitResultAdmin(ReadOnlyAdmin):
    """Fits, one per sweep label."""
    list_display = ["id", "run", "label", "exponent", "standard_error", "created_at"]
    list_filter = ["created_at"]
    search_fields = ["label"]
    raw_id_fields = ["run"]
