class ModelError(ValueError):
    """Invalid model primitives (bad parameters, r <= rho, ...)."""


class InfeasibleModel(ModelError):
    """Primitives are valid individually but the model is unstable (r <= rho)."""


class UnstablePolicy(ModelError):
    """A rate policy fails R > rho (or R > drift, for simulation)."""


class InfeasibleBudget(ModelError):
    """Phase-I budget exceeds what the rate cap allows."""


class DivergentMoment(ArithmeticError):
    """A required expectation is infinite for the given inputs."""
