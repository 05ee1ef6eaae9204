"""Exception hierarchy shared across the package.

Every error carries a machine ``code`` so the HTTP layer and the CLI can map
failures to stable status codes without string matching.
"""


class HetlabError(Exception):
    code = "internal"


class InputError(HetlabError):
    """Caller passed something malformed: bad shapes, unknown ids, bad flags."""

    code = "bad-input"


class SpecError(InputError):
    """A model specification is internally inconsistent."""


class NotFoundError(HetlabError):
    code = "not-found"


class UnsupportedArchitectureError(HetlabError):
    """Requested an operation the model kind cannot support (e.g. Grad-CAM on an MLP)."""

    code = "unsupported-architecture"


class NumericError(HetlabError):
    """Non-finite values or a failed numerical routine."""

    code = "numeric"


class AggregationError(InputError):
    """Parameter vectors submitted for aggregation do not line up."""
