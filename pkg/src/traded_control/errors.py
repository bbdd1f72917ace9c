"""Exception hierarchy shared by the simulator modules."""


class TradedControlError(Exception):
    """Base class for all simulator errors."""


class ConfigError(TradedControlError, ValueError):
    """Invalid parameters or configuration file."""


class ScenarioError(TradedControlError):
    """Scenario-level misuse, e.g. a step index outside the scripted horizon."""


class CollisionError(TradedControlError):
    """A vehicle gap reached zero."""


class ControllerError(TradedControlError):
    """The MPC quadratic program failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FilterError(TradedControlError):
    """The fusion filter covariance lost positive-definiteness."""


class ContractError(TradedControlError, ValueError):
    """A caller violated an operation's precondition."""
