from django import forms

from .ssimuse_b import BParams
from .ssimuse_v import VParams

B_FIELDS = ('window_steps', 'hop_steps', 'weight_exponent', 'lam', 'c1')


class BParamsForm(forms.Form):
    """Overrides for SSIMuse-B; blank fields fall back to settings.SSIMUSE_B_PARAMS."""
    window_steps = forms.IntegerField(min_value=1, required=False)
    hop_steps = forms.IntegerField(min_value=1, required=False)
    weight_exponent = forms.FloatField(min_value=0, required=False)
    lam = forms.FloatField(min_value=0, max_value=1, required=False)
    c1 = forms.FloatField(required=False)

    def clean_c1(self):
        c1 = self.cleaned_data.get('c1')
        if c1 is not None and c1 <= 0:
            raise forms.ValidationError('c1 must be a small positive constant.')
        return c1

    def b_params(self):
        return BParams.from_settings(**{name: self.cleaned_data.get(name) for name in B_FIELDS})


class VParamsForm(forms.Form):
    """Overrides for SSIMuse-V, prefixed v_ so they can share a config document with BParams."""
    v_c1 = forms.FloatField(required=False)
    v_c2 = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        for name in ('v_c1', 'v_c2'):
            value = cleaned_data.get(name)
            if value is not None and value <= 0:
                self.add_error(name, 'Stabilizing constants must be positive.')
        return cleaned_data

    def v_params(self):
        return VParams.from_settings(c1=self.cleaned_data.get('v_c1'), c2=self.cleaned_data.get('v_c2'))


class ParamsForm(BParamsForm, VParamsForm):
    """Both metrics' overrides, as used by compare and audit."""
