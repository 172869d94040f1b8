"""
Lossy edge-to-cloud channel.
"""

from typing import Optional

import numpy as np

from src.utils import get_logger, TelemetryMessage
from src.utils.bernoulli import BernoulliStream

logger = get_logger("lossy_channel")

class LossyChannel:
    """
    Drops each message independently with drop_probability (Bernoulli model)

    Counters satisfy sent = delivered + dropped after every transmit.
    """

    def __init__(self, drop_probability: float, seed: int = 0, name: str = "edge", rng: Optional[np.random.Generator] = None):
        self.name = name
        self.drop_probability = drop_probability
        self.seed = seed
        self._drops = BernoulliStream(drop_probability, rng if rng is not None else np.random.default_rng(seed))
        self.sent = 0
        self.delivered = 0
        self.dropped = 0

    def transmit(self, message: TelemetryMessage) -> bool:
        """
        Send one message across the channel

        Returns:
            True if the message reaches the far end, False if it was dropped
        """
        self.sent += 1
        if self._drops.next():
            self.dropped += 1
            logger.trace(f"{self.name}: dropped message {message.sequence} at {message.sent_at_ms}")
            return False
        self.delivered += 1
        return True

    def is_conserved(self) -> bool:
        return self.sent == self.delivered + self.dropped

    def stats(self) -> dict:
        return {
            "name": self.name,
            "drop_probability": self.drop_probability,
            "sent": self.sent,
            "delivered": self.delivered,
            "dropped": self.dropped,
        }
