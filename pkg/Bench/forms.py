import json
import os
import re

from django import forms
from django.conf import settings

from Metrics.forms import ParamsForm
from SSIMuse.exceptions import SSIMuseError

from .battery import Mode
from .emit import EMIT_CHOICES
from .sweep import SweepConfig, SweepParameter
from .synthesis import BenchConfig

SWEEP_ALIASES = {
    'window': SweepParameter.WINDOW_STEPS,
    'window-steps': SweepParameter.WINDOW_STEPS,
    'hop': SweepParameter.HOP_STEPS,
    'hop-steps': SweepParameter.HOP_STEPS,
    'weight-exp': SweepParameter.WEIGHT_EXPONENT,
    'weight_exp': SweepParameter.WEIGHT_EXPONENT,
    'exponent': SweepParameter.WEIGHT_EXPONENT,
}

PATH_KEYS = ('corpus', 'out')


class ConfigError(SSIMuseError):
    pass


class CommaListField(forms.Field):
    """A JSON list or a comma separated string such as "1,2,4,8"."""
    item_type = str

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if isinstance(value, str):
            value = [item.strip() for item in value.split(',') if item.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        try:
            return [self.item_type(item) for item in value]
        except (TypeError, ValueError):
            raise forms.ValidationError(f'Enter a list of {self.item_type.__name__} values.')


class IntegerListField(CommaListField):
    item_type = int


class FloatListField(CommaListField):
    item_type = float


class RunOptionsForm(ParamsForm):
    """Metric parameters plus the input and output options every command shares."""
    default_emit = ('csv', 'json')
    allowed_emit = ('csv', 'json')

    mode = forms.ChoiceField(choices=Mode.choices, required=False)
    tracks = forms.CharField(required=False)
    steps_per_quarter = forms.IntegerField(min_value=1, required=False)
    workers = forms.IntegerField(min_value=1, required=False)
    out = forms.CharField(required=False)
    emit = CommaListField(required=False)

    def clean_emit(self):
        emit = self.cleaned_data.get('emit') or list(self.default_emit)
        unknown = sorted(set(emit) - set(self.allowed_emit))
        if unknown:
            raise forms.ValidationError(f"Unknown output kind(s): {', '.join(unknown)}.")
        return emit

    @property
    def run_mode(self):
        return Mode(self.cleaned_data.get('mode') or Mode.BOTH)

    @property
    def worker_count(self):
        return self.cleaned_data.get('workers') or settings.SSIMUSE_WORKERS or 1

    @property
    def out_dir(self):
        return self.cleaned_data.get('out') or '.'


class AuditForm(RunOptionsForm):
    top_k = forms.IntegerField(min_value=1, required=False)


class BenchConfigForm(RunOptionsForm):
    default_emit = ('csv',)
    allowed_emit = EMIT_CHOICES

    corpus = forms.CharField()
    name = forms.CharField(required=False)
    seed = forms.CharField(required=False)
    clip_steps = forms.IntegerField(min_value=16, required=False)
    set_size = forms.IntegerField(min_value=1, required=False)
    synthetics_per_reference = forms.IntegerField(min_value=1, required=False)
    levels = IntegerListField(required=False)

    def clean_corpus(self):
        corpus = self.cleaned_data.get('corpus')
        if not os.path.isdir(corpus):
            raise forms.ValidationError(f'Corpus directory {corpus} does not exist.')
        return corpus

    def clean_seed(self):
        seed = self.cleaned_data.get('seed') or settings.SSIMUSE_SEED
        if seed in (None, ''):
            raise forms.ValidationError('A seed is required (--seed, the config file or SSIMUSE_SEED).')
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            raise forms.ValidationError('The seed must be an integer.')
        if not 0 <= seed < 2 ** 64:
            raise forms.ValidationError('The seed must be a 64-bit unsigned integer.')
        return seed

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        try:
            self.bench_config = BenchConfig.from_settings(
                cleaned_data['seed'],
                clip_steps=cleaned_data.get('clip_steps'),
                set_size=cleaned_data.get('set_size'),
                synthetics_per_reference=cleaned_data.get('synthetics_per_reference'),
                levels=cleaned_data.get('levels') or None,
                mode=cleaned_data.get('mode') or None,
                steps_per_bar=4 * (cleaned_data.get('steps_per_quarter') or settings.SSIMUSE_STEPS_PER_QUARTER),
            )
            self.b_params()
            self.v_params()
        except ValueError as e:
            raise forms.ValidationError(str(e))
        return cleaned_data

    @property
    def corpus_name(self):
        return self.cleaned_data.get('name') or os.path.basename(os.path.normpath(self.cleaned_data['corpus']))


class SweepConfigForm(BenchConfigForm):
    parameter = forms.CharField()
    values = FloatListField(required=False)

    def clean_parameter(self):
        parameter = self.cleaned_data.get('parameter').strip().lower()
        parameter = SWEEP_ALIASES.get(parameter, parameter)
        if parameter not in SweepParameter.values:
            choices = ', '.join(sorted(list(SweepParameter.values) + list(SWEEP_ALIASES)))
            raise forms.ValidationError(f'Unknown sweep parameter; choose one of {choices}.')
        return SweepParameter(parameter)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        parameter = cleaned_data['parameter']
        values = cleaned_data.get('values') or list(SweepConfig.default_values(parameter))
        if parameter != SweepParameter.WEIGHT_EXPONENT:
            if any(v != int(v) or v < 1 for v in values):
                raise forms.ValidationError(f'{parameter} values must be positive whole steps.')
            values = [int(v) for v in values]
        elif any(v < 0 for v in values):
            raise forms.ValidationError('weight_exponent values must be nonnegative.')
        self.sweep_config = SweepConfig(parameter, tuple(values), self.bench_config)
        return cleaned_data


def _key_line(text, key):
    match = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count('\n', 0, match.start()) + 1 if match else None


def read_config(path):
    """Parse a JSON config document; returns (data, text).

    Nested "base" objects are flattened into the top level. Relative corpus
    and output paths resolve against the config file's directory.
    """
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1:1: the config must be a JSON object")

    base = data.pop('base', None) or {}
    if not isinstance(base, dict):
        raise ConfigError(f"{path}:{_key_line(text, 'base')}: base must be a JSON object")
    data = {**base, **data}
    here = os.path.dirname(os.path.abspath(path))
    for key in PATH_KEYS:
        if isinstance(data.get(key), str) and not os.path.isabs(data[key]):
            data[key] = os.path.join(here, data[key])
    return data, text


def bind_config(form_class, data, overrides=None, text='', source='config'):
    """Validate file values with command-line overrides on top; raises ConfigError."""
    merged = dict(data)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(merged) - set(form_class.base_fields))
    form = form_class(data=merged)
    if form.is_valid() and not unknown:
        return form

    problems = [f"{source}: unknown field '{key}'" + (f" (line {_key_line(text, key)})" if text else '')
                for key in unknown]
    for field, errors in form.errors.items():
        line = _key_line(text, field) if text and field in data else None
        where = f"{field} (line {line})" if line else field
        if field == '__all__':
            where = 'config'
        for error in errors:
            problems.append(f"{source}: {where}: {error}")
    raise ConfigError('\n'.join(problems))
