"""hetlab: a federated-learning heterogeneity laboratory.

Simulates FedAvg training across isolated clients, compares a client's
stand-alone model against the federated model, clusters inconsistent records
with a context-aware rank-based distance, and serves every analytical view
over a versioned JSON API.
"""

from .data import Dataset, Manifest, make_blobs
from .errors import (AggregationError, HetlabError, InputError, NotFoundError,
                     NumericError, SpecError, UnsupportedArchitectureError)
from .federation import (ClientConfig, RoundSnapshot, fed_avg, run_federation,
                         train_local, train_standalone)
from .models import (CNNNetwork, LayoutEntry, MLPNetwork, ModelSpec, ParamVector,
                     build_network, forward, init_model)

__version__ = "0.1.0"

__all__ = [
    "AggregationError", "CNNNetwork", "ClientConfig", "Dataset", "HetlabError",
    "InputError", "LayoutEntry", "MLPNetwork", "Manifest", "ModelSpec",
    "NotFoundError", "NumericError", "ParamVector", "RoundSnapshot", "SpecError",
    "UnsupportedArchitectureError", "build_network", "fed_avg", "forward",
    "init_model", "make_blobs", "run_federation", "train_local", "train_standalone",
    "__version__",
]
