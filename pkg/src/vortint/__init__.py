"""Conserved vorticity integrals on surfaces advected by inviscid flows."""
from .errors import (AdvectionError, CFLError, ConfigError, DegenerateFrameError, DegreeError, DomainError,
                     MetricError, VortintError)
from .geom import AltTensor, hook, wedge

__version__ = "0.1.0"
