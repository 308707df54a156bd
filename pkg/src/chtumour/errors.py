"""Exception hierarchy.

Configuration problems (exit code 1 on the command line) derive from
:class:`ConfigError`; failures during a run (exit code 2) derive from
:class:`SimulationError`.
"""


class ConfigError(ValueError):
    pass


class NonpositiveConstant(ConfigError):
    pass


class ConstraintViolated(ConfigError):
    pass


class DegenerateParameter(ConfigError):
    pass


class InsufficientQuadrature(ConfigError):
    pass


class SimulationError(RuntimeError):
    pass


class BlowUp(SimulationError):
    pass


class StepUnderflow(SimulationError):
    pass


class StepLimitExceeded(SimulationError):
    pass


class FixedPointFailure(SimulationError):
    pass


class SingularOperator(SimulationError):
    pass
