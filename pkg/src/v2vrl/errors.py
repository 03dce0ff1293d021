"""Exception types shared across the simulator and trainer."""


class V2VRLError(Exception):
    """Base class for all package errors."""


class ConfigError(V2VRLError):
    """Invalid configuration: unknown key, bad type, or out-of-range value."""


class ContractError(V2VRLError):
    """A caller violated an operation's precondition (shape/index/state)."""


class TrainingError(V2VRLError):
    """Training failed: divergence or non-finite gradients."""
