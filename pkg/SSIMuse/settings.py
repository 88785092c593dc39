"""
Django settings for SSIMuse project.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Piano roll grid: 4 steps per quarter note, so a 4/4 bar is 16 steps
SSIMUSE_STEPS_PER_QUARTER = 4
SSIMUSE_CLIP_STEPS = 256

# SSIMuse-B defaults (window/hop in time steps)
SSIMUSE_B_PARAMS = {
    'window_steps': 16,
    'hop_steps': 16,
    'weight_exponent': 1.0,
    'lam': 0.5,
    'c1': 1e-4,
}

# SSIMuse-V defaults; c3 is always c2 / 2
SSIMUSE_V_PARAMS = {
    'c1': 1e-4,
    'c2': 9e-4,
}

# Desk-scale forced replication benchmark
SSIMUSE_BENCH = {
    'clip_steps': SSIMUSE_CLIP_STEPS,
    'set_size': 20,
    'synthetics_per_reference': 5,
    'levels': [1, 2, 4, 8],
    'mode': 'both',
}

SSIMUSE_SWEEP_VALUES = {
    'window_steps': [8, 16, 32],
    'hop_steps': [4, 8, 16],
    'weight_exponent': [0.5, 1.0, 2.0],
}

SSIMUSE_WORKERS = os.cpu_count() or 1

# Seed fallback for bench/sweep when neither --seed nor the config sets one
SSIMUSE_SEED = os.environ.get('SSIMUSE_SEED')


# Quick-start development settings - unsuitable for production
# See https://docs.djangoproject.com/en/5.2/howto/deployment/checklist/

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SSIMUSE_SECRET_KEY', 'django-insecure-ssimuse-local-cli-only')

DEBUG = False


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'Rolls',
    'Metrics',
    'Bench',
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'ssimuse': {
            'handlers': ['console'],
            'level': os.environ.get('SSIMUSE_LOG_LEVEL', 'WARNING'),
        },
    },
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'
