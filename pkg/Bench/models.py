from django.db import DatabaseError, models
from django.utils import timezone
import logging

logger = logging.getLogger('ssimuse')


class BenchRun(models.Model):
    KIND_CHOICES = [
        ('BENCH', 'Bench'),
        ('SWEEP', 'Sweep'),
    ]

    kind = models.CharField(max_length=10, choices=KIND_CHOICES, default='BENCH')
    corpus = models.CharField(max_length=255)
    mode = models.CharField(max_length=10)
    seed = models.CharField(max_length=20)  # 64-bit unsigned does not fit a signed BigIntegerField
    config = models.JSONField(default=dict)
    stats = models.JSONField(default=dict, blank=True)
    pair_count = models.IntegerField(default=0)
    skipped_count = models.IntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.kind} {self.corpus} seed={self.seed} ({self.mode})"

    @classmethod
    def record(cls, kind, corpus, mode, seed, config, stats=None, pair_count=0, skipped_count=0):
        """Store a finished run; returns None when the database is unavailable."""
        try:
            return cls.objects.create(
                kind=kind,
                corpus=corpus,
                mode=mode,
                seed=str(seed),
                config=config,
                stats=stats or {},
                pair_count=pair_count,
                skipped_count=skipped_count,
                finished_at=timezone.now(),
            )
        except DatabaseError as e:
            logger.warning(f"Run not recorded (database unavailable, run 'manage.py migrate'): {e}")
            return None


class RunLog(models.Model):
    ACTION_CHOICES = [
        ('COMPARE', 'Compare'),
        ('AUDIT', 'Audit'),
        ('BENCH', 'Bench'),
        ('SWEEP', 'Sweep'),
        ('REJECTED', 'Rejected Input'),
        ('ERROR', 'Error'),
    ]

    action = models.CharField(max_length=10, choices=ACTION_CHOICES)
    description = models.TextField()
    timestamp = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-timestamp']

    def __str__(self):
        return f"{self.action} - {self.timestamp}"

    @classmethod
    def log_action(cls, action, description):
        logger.info(f"RUN: {action} - {description}")
        try:
            return cls.objects.create(action=action, description=description)
        except DatabaseError as e:
            logger.warning(f"Run log entry dropped (database unavailable): {e}")
            return None
