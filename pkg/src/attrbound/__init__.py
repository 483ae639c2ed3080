"""Certified upper bounds on attribution deviations for softplus MLPs."""

from .attrib import AttributionMethod, attribute, attribution_jacobian
from .bounds import BoundCertificate, certify
from .errors import ConfigError, DomainError, ShapeError, TrainingError
from .net import Model, init_model, load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "AttributionMethod", "attribute", "attribution_jacobian",
    "BoundCertificate", "certify",
    "ConfigError", "DomainError", "ShapeError", "TrainingError",
    "Model", "init_model", "load_model", "save_model",
]
