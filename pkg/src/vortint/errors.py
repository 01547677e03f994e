"""Exception types shared across the package."""

import numpy as np


class VortintError(Exception):
    """Base class for all package errors."""


class DegreeError(VortintError, ValueError):
    """Form degrees or variances that cannot be combined."""


class MetricError(VortintError, ArithmeticError):
    """Metric that is singular, non-symmetric or not positive definite at a point."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at x={np.array2string(np.asarray(point), precision=6)}"
        super().__init__(message)
        self.point = point


class DegenerateFrameError(VortintError, ArithmeticError):
    """Tangent frame whose rank dropped below the surface dimension."""

    def __init__(self, message, node=None):
        if node is not None:
            message = f"{message} (node {node})"
        super().__init__(message)
        self.node = node


class DomainError(VortintError, ValueError):
    """Flow queried outside its declared domain or time horizon."""


class AdvectionError(VortintError, RuntimeError):
    """Non-finite flow sample or rank loss while advecting material nodes."""

    def __init__(self, message, node=None, stage=None, t=None):
        parts = [message]
        if node is not None:
            parts.append(f"node {node}")
        if stage is not None:
            parts.append(f"stage {stage}")
        if t is not None:
            parts.append(f"t={t:.6g}")
        super().__init__(", ".join(parts))
        self.node = node
        self.stage = stage
        self.t = t


class CFLError(VortintError, ValueError):
    """Time step violating the spectral solver's CFL bound."""


class ConfigError(VortintError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path

