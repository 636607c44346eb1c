"""
Error hierarchy shared by every peakload module.

Each error carries a module-qualified ``code`` (for example
``powerlaw.BelowTail``) so command output can name where it came from.
"""


class PeakLoadError(Exception):
    code = "peakload.Error"

    def __init__(self, message="", **details):
        super().__init__(message or self.code)
        self.details = details

    def __str__(self):
        return f"[{self.code}] {self.args[0]}"


class InvalidParameter(PeakLoadError):
    code = "peakload.InvalidParameter"


# =========================================================
# ccdf
# =========================================================
class EmptyInput(PeakLoadError):
    code = "ccdf.EmptyInput"


class InvalidValue(PeakLoadError):
    code = "ccdf.InvalidValue"

    def __init__(self, message="", index=None, **details):
        super().__init__(message, index=index, **details)
        self.index = index


# =========================================================
# powerlaw
# =========================================================
class DegenerateTail(PeakLoadError):
    code = "powerlaw.DegenerateTail"


class InsufficientTail(PeakLoadError):
    code = "powerlaw.InsufficientTail"


class InvalidAlpha(PeakLoadError):
    code = "powerlaw.InvalidAlpha"


class BelowTail(PeakLoadError):
    code = "powerlaw.BelowTail"


# =========================================================
# tailscan
# =========================================================
class InsufficientData(PeakLoadError):
    code = "tailscan.InsufficientData"


class NoValidCandidate(PeakLoadError):
    code = "tailscan.NoValidCandidate"


# =========================================================
# gof / bootstrap / altdists
# =========================================================
class FitMismatch(PeakLoadError):
    code = "gof.FitMismatch"


class TooFewReplicates(PeakLoadError):
    code = "gof.TooFewReplicates"


class UnstableBootstrap(PeakLoadError):
    code = "bootstrap.UnstableBootstrap"

    def __init__(self, message="", partial=None, **details):
        super().__init__(message, **details)
        self.partial = partial


class FitDiverged(PeakLoadError):
    code = "altdists.FitDiverged"

    def __init__(self, message="", family=None, diagnostics=None, **details):
        super().__init__(message, family=family, **details)
        self.family = family
        self.diagnostics = diagnostics or {}


# =========================================================
# ingest
# =========================================================
class SchemaError(PeakLoadError):
    code = "ingest.SchemaError"


class QualityError(PeakLoadError):
    code = "ingest.QualityError"

    def __init__(self, message="", total=0, rejected=0, **details):
        super().__init__(message, total=total, rejected=rejected, **details)
        self.total = total
        self.rejected = rejected


class NoCompleteBuckets(PeakLoadError):
    code = "ingest.NoCompleteBuckets"


class NoTimestamps(PeakLoadError):
    code = "ingest.NoTimestamps"


# =========================================================
# cli
# =========================================================
class UsageError(PeakLoadError):
    code = "cli.UsageError"
