# Generated by Django 5.2.7 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=200)),
                ('run_dir', models.CharField(max_length=500, unique=True)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('alpha', models.FloatField(default=0.0)),
                ('beta', models.FloatField(default=0.0)),
                ('noise_source', models.CharField(choices=[('asr', 'ASR transcripts'), ('gaussian', 'Gaussian embedding noise')], default='asr', max_length=20)),
                ('seed', models.IntegerField()),
                ('steps', models.PositiveIntegerField(help_text='Configured number of steps')),
                ('init_checkpoint', models.CharField(blank=True, max_length=500)),
                ('steps_completed', models.PositiveIntegerField(default=0)),
                ('final_l_normal', models.FloatField(blank=True, null=True)),
                ('final_l_enc', models.FloatField(blank=True, null=True)),
                ('final_l_dec', models.FloatField(blank=True, null=True)),
                ('final_total', models.FloatField(blank=True, null=True)),
                ('error_message', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['status'], name='trainingrun_status_idx'), models.Index(fields=['alpha', 'beta'], name='trainingrun_weights_idx')],
            },
        ),
    ]
