import numpy as np

from discharge_scenarios.netcore.base import ModelParams

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


class Adam:
    """Adaptive-moment optimizer over every ModelParams array."""

    def __init__(self, learning_rate, beta1=BETA1, beta2=BETA2, epsilon=EPSILON):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.steps = 0
        self.first = {}
        self.second = {}

    def step(self, params, grads):
        """Return the updated parameters; ``params`` is not modified."""
        self.steps += 1
        correction1 = 1.0 - self.beta1**self.steps
        correction2 = 1.0 - self.beta2**self.steps
        updated = {}
        for name, value in params.items():
            g = grads[name]
            m = self.beta1 * self.first.get(name, 0.0) + (1.0 - self.beta1) * g
            v = self.beta2 * self.second.get(name, 0.0) + (1.0 - self.beta2) * g * g
            self.first[name] = m
            self.second[name] = v
            updated[name] = value - self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.epsilon)
        return ModelParams(params.config, updated)
