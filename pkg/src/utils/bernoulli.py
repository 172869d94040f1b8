from typing import List, Optional

import numpy as np

class BernoulliStream:
    """
    i.i.d. Bernoulli trials from a seeded generator, drawn in blocks

    Uniforms are pre-drawn block_size at a time; the sequence of outcomes only
    depends on the generator seed and the probabilities asked for.
    """

    def __init__(self, probability: float, rng: np.random.Generator, block_size: int = 4096):
        self.probability = self._checked(probability)
        self.rng = rng
        self.block_size = block_size
        self._block: List[float] = []
        self._index = 0

    @staticmethod
    def _checked(probability: float) -> float:
        if probability < 0 or probability > 1:
            raise ValueError(f"Probability must be between 0 and 1, got {probability}")
        return probability

    def next(self, probability: Optional[float] = None) -> bool:
        """True with the given probability (the configured one by default)"""
        p = self.probability if probability is None else self._checked(probability)
        if self._index >= len(self._block):
            self._block = self.rng.random(self.block_size).tolist()
            self._index = 0
        outcome = self._block[self._index] < p
        self._index += 1
        return outcome
