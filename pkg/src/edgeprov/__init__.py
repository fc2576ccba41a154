"""Latency-aware resource provisioning for edge nodes: a library and a
discrete-time simulator."""
from .domain import (KINDS, Container, EdgeDevice, EdgeNode, Request, ResourceKind,
                     ResourceVector, Service, associate, residual, validate_capacity)
from .errors import (ConfigurationError, ContractViolation, DescriptorValidationError, DomainError,
                     EdgeProvError, InvariantError, MissingElementError, NoSchemeError,
                     UnknownDeviceError, XMLParseError)
from .kernels import BACKEND
from .sim import Metrics, SimConfig, generate_arrivals, measure_service_capacity, run

__version__ = "0.1.0"

__all__ = [
    "KINDS", "Container", "EdgeDevice", "EdgeNode", "Request", "ResourceKind", "ResourceVector",
    "Service", "associate", "residual", "validate_capacity", "ConfigurationError",
    "ContractViolation", "DescriptorValidationError", "DomainError", "EdgeProvError",
    "InvariantError", "MissingElementError", "NoSchemeError", "UnknownDeviceError",
    "XMLParseError", "BACKEND", "Metrics", "SimConfig", "generate_arrivals",
    "measure_service_capacity", "run",
]
