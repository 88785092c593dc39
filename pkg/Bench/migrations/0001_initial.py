# Generated by Django 5.2.4 on 2026-10-16 12:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='BenchRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('BENCH', 'Bench'), ('SWEEP', 'Sweep')], default='BENCH', max_length=10)),
                ('corpus', models.CharField(max_length=255)),
                ('mode', models.CharField(max_length=10)),
                ('seed', models.CharField(max_length=20)),
                ('config', models.JSONField(default=dict)),
                ('stats', models.JSONField(blank=True, default=dict)),
                ('pair_count', models.IntegerField(default=0)),
                ('skipped_count', models.IntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='RunLog',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('action', models.CharField(choices=[('COMPARE', 'Compare'), ('AUDIT', 'Audit'), ('BENCH', 'Bench'), ('SWEEP', 'Sweep'), ('REJECTED', 'Rejected Input'), ('ERROR', 'Error')], max_length=10)),
                ('description', models.TextField()),
                ('timestamp', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-timestamp'],
            },
        ),
    ]
