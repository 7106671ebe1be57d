"""
Persisted sweeps.

A SweepRun stores the experiment configuration that produced it; its
SweepRecords are the per-trial EstimationRecords and its ScalingFitResults
the fits computed from them. Together they rebuild the records CSV and fits
JSON written by ``manage.py sweep``.

Usage:
    run = SweepRun.from_config(config)
    SweepRecord.objects.bulk_create(SweepRecord.from_records(run, records), batch_size=1000)
    records = run.estimation_records()
"""
import math

from django.db import models

from phase_app.harness import ExperimentConfig, ScalingFit
from phase_app.records import FLAG_SEPARATOR, EstimationRecord, Method, Regime


def _nullable(value: float) -> float | None:
    return None if math.isnan(value) else value


def _restored(value: float | None) -> float:
    return float("nan") if value is None else value


class SweepRun(models.Model):
    """One sweep: a configuration, its master seed and when it ran."""
    method = models.CharField(max_length=2, choices=[(m.value, m.value) for m in Method])
    regime = models.CharField(max_length=10, choices=[(r.value, r.value) for r in Regime])
    q = models.FloatField()
    M = models.FloatField()
    seed = models.BigIntegerField(help_text="Master seed; every trial stream derives from it.")
    config = models.JSONField(help_text="Nested experiment configuration document.")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = "sweep_run"
        ordering = ["-created_at"]
        indexes = [
            models.Index(fields=["method", "regime", "q"], name="sweep_run_method_idx"),
        ]

    def __str__(self) -> str:
        return f"{self.method}-{self.regime} q={self.q:g} M={self.M:g} seed={self.seed}"

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "SweepRun":
        return cls.objects.create(
            method=config.method.value,
            regime=config.regime.value,
            q=config.q,
            M=config.M,
            seed=config.seed,
            config=config.to_dict(),
        )

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig.from_dict(self.config)

    def estimation_records(self) -> list[EstimationRecord]:
        return [r.to_record() for r in self.records.order_by("N", "trial")]

    def scaling_fits(self) -> list[ScalingFit]:
        return [f.to_fit() for f in self.fits.order_by("id")]


class SweepRecord(models.Model):
    """
    One trial. Errors of failed trials are stored as NULL and come back
    as NaN.
    """
    run = models.ForeignKey(SweepRun, on_delete=models.CASCADE, related_name="records")
    N = models.BigIntegerField()
    trial = models.IntegerField()
    seed = models.BigIntegerField()
    mspe = models.FloatField(null=True)
    err_a_sq = models.FloatField(null=True)
    err_b_sq = models.FloatField(null=True)
    particles_used = models.BigIntegerField()
    flags = models.CharField(max_length=200, blank=True, default="")

    class Meta:
        db_table = "sweep_record"
        constraints = [
            models.UniqueConstraint(fields=["run", "N", "trial"], name="sweep_record_unique_trial"),
        ]

    def __str__(self) -> str:
        return f"N={self.N} trial={self.trial}"

    @classmethod
    def from_records(cls, run: SweepRun, records: list[EstimationRecord]) -> list["SweepRecord"]:
        return [
            cls(
                run=run,
                N=r.N,
                trial=r.trial,
                seed=r.seed,
                mspe=_nullable(r.mspe),
                err_a_sq=_nullable(r.err_a_sq),
                err_b_sq=_nullable(r.err_b_sq),
                particles_used=r.particles_used,
                flags=FLAG_SEPARATOR.join(r.flags),
            )
            for r in records
        ]

    def to_record(self) -> EstimationRecord:
        return EstimationRecord(
            method=Method(self.run.method),
            regime=Regime(self.run.regime),
            q=self.run.q,
            M=self.run.M,
            N=self.N,
            trial=self.trial,
            seed=self.seed,
            mspe=_restored(self.mspe),
            err_a_sq=_restored(self.err_a_sq),
            err_b_sq=_restored(self.err_b_sq),
            particles_used=self.particles_used,
            flags=tuple(f for f in self.flags.split(FLAG_SEPARATOR) if f),
        )


class ScalingFitResult(models.Model):
    """Fitted exponent of mean delta against N, with its per-N points."""
    run = models.ForeignKey(SweepRun, on_delete=models.CASCADE, related_name="fits")
    label = models.CharField(max_length=100, blank=True, default="")
    exponent = models.FloatField()
    intercept = models.FloatField()
    standard_error = models.FloatField()
    exponent_sq = models.FloatField(help_text="Exponent of mean delta^2, about twice the delta exponent.")
    payload = models.JSONField(help_text="Full fit including window, exclusions and points.")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = "scaling_fit"

    def __str__(self) -> str:
        return f"{self.label or self.run} exponent={self.exponent:+.4f}"

    @classmethod
    def from_fit(cls, run: SweepRun, fit: ScalingFit) -> "ScalingFitResult":
        return cls(
            run=run,
            label=fit.label,
            exponent=fit.exponent,
            intercept=fit.intercept,
            standard_error=fit.standard_error,
            exponent_sq=fit.exponent_sq,
            payload=fit.to_dict(),
        )

    def to_fit(self) -> ScalingFit:
        return ScalingFit.from_dict(self.payload)
