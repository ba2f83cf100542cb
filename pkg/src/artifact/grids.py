from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [0, length] with ``n_points`` nodes including both ends."""

    length: float
    n_points: int

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"grid length must be positive, got {self.length}")
        if self.n_points < 3:
            raise DomainError(f"need at least 3 grid points, got {self.n_points}")

    @property
    def spacing(self):
        return self.length / (self.n_points - 1)

    def points(self):
        return np.linspace(0.0, self.length, self.n_points)

    def refined(self, factor=2):
        return GridSpec(self.length, factor * (self.n_points - 1) + 1)
