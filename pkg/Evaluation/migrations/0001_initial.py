# Generated by Django 5.2.7 on 2026-10-19 09:14

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
        ('Training', '0001_initial'),
    ]

    operations = [
        migrations.CreateModel(
            name='EvalReport',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('dataset', models.CharField(help_text='Dataset identifier, e.g. dev', max_length=200)),
                ('condition', models.CharField(choices=[('clean', 'Clean reference transcripts'), ('noisy', 'ASR transcripts')], max_length=10)),
                ('step', models.PositiveIntegerField(default=0)),
                ('bleu', models.FloatField()),
                ('precisions', models.JSONField(default=list, help_text='n-gram precisions p1..pN')),
                ('brevity_penalty', models.FloatField()),
                ('hypothesis_length', models.PositiveIntegerField(default=0)),
                ('reference_length', models.PositiveIntegerField(default=0)),
                ('alpha', models.FloatField(default=0.0)),
                ('beta', models.FloatField(default=0.0)),
                ('checkpoint', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.CASCADE, related_name='evaluations', to='Training.trainingrun')),
            ],
            options={
                'ordering': ['condition', 'alpha', 'beta', 'step'],
                'indexes': [models.Index(fields=['dataset', 'condition'], name='evalreport_dataset_idx')],
            },
        ),
    ]
