# Generated by Django 5.1 on 2026-10-16 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SweepRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('method', models.CharField(choices=[('PS', 'PS'), ('WS', 'WS')], max_length=2)),
                ('regime', models.CharField(choices=[('SQL', 'SQL'), ('Heisenberg', 'Heisenberg')], max_length=10)),
                ('q', models.FloatField()),
                ('M', models.FloatField()),
                ('seed', models.BigIntegerField(help_text='Master seed; every trial stream derives from it.')),
                ('config', models.JSONField(help_text='Nested experiment configuration document.')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'sweep_run',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['method', 'regime', 'q'], name='sweep_run_method_idx')],
            },
        ),
        migrations.CreateModel(
            name='ScalingFitResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(blank=True, default='', max_length=100)),
                ('exponent', models.FloatField()),
                ('intercept', models.FloatField()),
                ('standard_error', models.FloatField()),
                ('exponent_sq', models.FloatField(help_text='Exponent of mean delta^2, about twice the delta exponent.')),
                ('payload', models.JSONField(help_text='Full fit including window, exclusions and points.')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='fits', to='phase_app.sweeprun')),
            ],
            options={
                'db_table': 'scaling_fit',
            },
        ),
        migrations.CreateModel(
            name='SweepRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('N', models.BigIntegerField()),
                ('trial', models.IntegerField()),
                ('seed', models.BigIntegerField()),
                ('mspe', models.FloatField(null=True)),
                ('err_a_sq', models.FloatField(null=True)),
                ('err_b_sq', models.FloatField(null=True)),
                ('particles_used', models.BigIntegerField()),
                ('flags', models.CharField(blank=True, default='', max_length=200)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='phase_app.sweeprun')),
            ],
            options={
                'db_table': 'sweep_record',
                'constraints': [models.UniqueConstraint(fields=('run', 'N', 'trial'), name='sweep_record_unique_trial')],
            },
        ),
    ]
