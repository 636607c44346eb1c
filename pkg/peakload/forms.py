from django import forms

from .tailscan import CANDIDATE_RULE_CHOICES, DEFAULT_MIN_TAIL


FORMAT_JSON = "json"
FORMAT_CSV = "csv"

FORMAT_CHOICES = [
    (FORMAT_JSON, "JSON report"),
    (FORMAT_CSV, "CSV table"),
]


class RunConfigForm(forms.Form):
    """
    Validates the merged run configuration (settings, config file,
    environment, flags). Every value may arrive as text.
    """

    seed = forms.IntegerField(min_value=0)
    replicates = forms.IntegerField(min_value=1)
    significance = forms.FloatField()
    ci_level = forms.FloatField()
    min_tail = forms.IntegerField(min_value=DEFAULT_MIN_TAIL)
    candidate_rule = forms.ChoiceField(choices=CANDIDATE_RULE_CHOICES)
    quantile_candidates = forms.IntegerField(min_value=2)
    workers = forms.IntegerField(min_value=1)
    min_coverage = forms.FloatField(min_value=0.0, max_value=1.0)
    window_days = forms.IntegerField(min_value=1)
    format = forms.ChoiceField(choices=FORMAT_CHOICES)

    def clean_significance(self):
        value = self.cleaned_data.get("significance")
        if value is not None and not 0 < value < 1:
            raise forms.ValidationError("Significance must lie strictly between 0 and 1.")
        return value

    def clean_ci_level(self):
        value = self.cleaned_data.get("ci_level")
        if value is not None and not 0.5 < value < 1:
            raise forms.ValidationError("Confidence level must lie strictly between 0.5 and 1.")
        return value
