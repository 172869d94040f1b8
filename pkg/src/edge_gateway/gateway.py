"""
Edge gateway: polls its collector on the virtual clock and forwards telemetry.
"""

from enum import Enum
from typing import Any, Callable, List, Optional, Tuple

from src.utils import get_logger, Device, TelemetryMessage, RestartEvent
from src.sensor_sim import SensorSimulator
from src.edge_gateway.channel import LossyChannel

logger = get_logger("edge_gateway")

class DeliveryOutcome(str, Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"

class WatchdogStatus(str, Enum):
    HEALTHY = "healthy"
    RESTARTED = "restarted"

class EdgeGateway:
    """
    Aggregator and local gateway of one sensor box.

    Sequence numbers start at 1 and are gapless at the point of sending;
    gaps only appear downstream through drops. A watchdog restart clears
    the hung state but keeps the sequence counter.
    """

    def __init__(
        self,
        device: Device,
        simulator: SensorSimulator,
        channel: LossyChannel,
        deliver: Callable[[TelemetryMessage], Any],
        stall_window_ms: int = 300_000,
        registered_at_ms: int = 0,
    ):
        self.device = device
        self.simulator = simulator
        self.channel = channel
        self.deliver = deliver
        self.stall_window_ms = stall_window_ms
        self.next_sequence = 1
        self.last_poll_ms = registered_at_ms
        self.generated = 0
        self.missed_polls = 0
        self.restart_events: List[RestartEvent] = []
        self._stalls: List[Tuple[int, int]] = []

    @property
    def device_id(self) -> int:
        return self.device.id

    def inject_stall(self, start_ms: int, duration_ms: int) -> None:
        """Hang the gateway for [start, start + duration) unless the watchdog restarts it first"""
        self._stalls.append((start_ms, start_ms + duration_ms))
        self._stalls.sort()
        logger.info(f"Gateway {self.device_id}: stall injected at {start_ms} for {duration_ms} ms")

    def is_stalled(self, t: int) -> bool:
        return any(start <= t < end for start, end in self._stalls)

    def tick(self, t: int) -> Optional[DeliveryOutcome]:
        """One step of the polling loop; a hung gateway misses the poll"""
        if self.is_stalled(t):
            self.missed_polls += 1
            return None
        return self.poll_and_send(t)

    def poll_and_send(self, t: int) -> DeliveryOutcome:
        """
        Poll the collector at t and send one telemetry message toward the hub.

        Args:
            t: Virtual time in ms, on the sampling grid

        Returns:
            DELIVERED if the message reached the hub inbox, DROPPED otherwise
        """
        reading = self.simulator.read(t)
        message = TelemetryMessage(sequence=self.next_sequence, reading=reading, sent_at_ms=t)
        self.next_sequence += 1
        self.generated += 1
        self.last_poll_ms = t

        if self.channel.transmit(message):
            self.deliver(message)
            return DeliveryOutcome.DELIVERED
        return DeliveryOutcome.DROPPED

    def watchdog_tick(self, now: int) -> WatchdogStatus:
        """
        Restart the gateway when no poll succeeded within the stall window.
        """
        if now - self.last_poll_ms <= self.stall_window_ms:
            return WatchdogStatus.HEALTHY

        # Ending every stall that is active now is the reset
        self._stalls = [(start, min(end, now)) if start <= now < end else (start, end) for start, end in self._stalls]
        event = RestartEvent(
            device_id=self.device_id,
            at_ms=now,
            reason=f"no successful poll for {now - self.last_poll_ms} ms",
            next_sequence=self.next_sequence,
        )
        self.restart_events.append(event)
        self.last_poll_ms = now
        logger.warning(f"Gateway {self.device_id}: watchdog restart at {now} ({event.reason}), next sequence {self.next_sequence}")
        return WatchdogStatus.RESTARTED
