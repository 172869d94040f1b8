"""
Cloud hub: central ingestion point and the consumer stage behind it.
"""

import json
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional

import numpy as np

from src.utils import get_logger, Reading, SensingRecord, TelemetryMessage
from src.utils.bernoulli import BernoulliStream
from src.utils.errors import HeritageSenseError, ParseRejected, StorageError
from src.telemetry_store import TelemetryStore, partition_key
from src.cloud_hub.tiers import ReliabilityTier
from src.cloud_hub.metrics import HourlyMetricsRecorder
from src.cloud_hub.ledger import DeviceLedger

logger = get_logger("cloud_hub")

@dataclass
class HubEvent:
    """An ingested message waiting for the consumer stage"""
    message: TelemetryMessage
    received_at_ms: int
    consumed: bool = False

    @property
    def device_id(self) -> int:
        return self.message.device_id

@dataclass
class DeviceCounters:
    hub_received: int = 0
    consumed: int = 0
    stored: int = 0
    consumer_dropped: int = 0

class CloudHub:
    """
    Ingests device-to-cloud telemetry and runs the consumer function on each event.

    The consumer drops each event independently with the tier's drop
    probability; successful executions parse the reading and insert it into
    the store. A store failure is not a modelled loss and aborts the run.
    """

    def __init__(self, store: TelemetryStore, tier: ReliabilityTier, seed: int = 0, rng: Optional[np.random.Generator] = None):
        self.store = store
        self.tier = tier
        self.metrics = HourlyMetricsRecorder()
        self.pending: Deque[HubEvent] = deque()
        self.counters: Dict[int, DeviceCounters] = {}
        self.rejected = 0
        self._drops = BernoulliStream(
            tier.consume_drop_probability,
            rng if rng is not None else np.random.default_rng(seed),
        )

    def device_counters(self, device_id: int) -> DeviceCounters:
        counters = self.counters.get(device_id)
        if counters is None:
            counters = self.counters[device_id] = DeviceCounters()
        return counters

    def ingest(self, message: TelemetryMessage, now_ms: Optional[int] = None) -> HubEvent:
        """
        Accept one delivered message and queue it for the consumer.

        Args:
            message: Message delivered by the edge channel
            now_ms: Virtual receive time, defaults to the send time

        Returns:
            The queued event

        Raises:
            ParseRejected: the message carries no parsable reading
        """
        if message.reading is None:
            self.rejected += 1
            logger.warning(f"Rejected message {message.sequence}: no reading in payload")
            raise ParseRejected(f"Message {message.sequence} carries no reading")

        received_at = message.sent_at_ms if now_ms is None else now_ms
        event = HubEvent(message=message, received_at_ms=received_at)
        self.device_counters(message.device_id).hub_received += 1
        self.metrics.record_received(received_at)
        self.pending.append(event)
        return event

    def ingest_payload(self, payload: bytes, sequence: int = 0, now_ms: int = 0) -> HubEvent:
        """
        Decode a JSON device-to-cloud payload and ingest it.

        Raises:
            ParseRejected: the payload is empty or not a valid reading
        """
        try:
            if not payload:
                raise ValueError("empty payload")
            reading = Reading.from_payload(json.loads(payload))
        except (ValueError, TypeError, KeyError) as e:
            self.rejected += 1
            logger.warning(f"Rejected payload {sequence}: {e}")
            raise ParseRejected(f"Unparsable payload {sequence}: {e}") from e
        return self.ingest(TelemetryMessage(sequence=sequence, reading=reading, sent_at_ms=now_ms), now_ms)

    def consume(self, event: HubEvent, tier: Optional[ReliabilityTier] = None) -> Optional[SensingRecord]:
        """
        Execute the consumer function on one event.

        Args:
            event: A previously ingested event
            tier: Tier override; the hub's own tier by default

        Returns:
            The stored record, or None if the execution was dropped
        """
        if event.consumed:
            raise HeritageSenseError(f"Event for message {event.message.sequence} was already consumed")
        event.consumed = True
        probability = (tier or self.tier).consume_drop_probability
        counters = self.device_counters(event.device_id)

        if self._drops.next(probability):
            counters.consumer_dropped += 1
            logger.trace(f"Consumer dropped message {event.message.sequence} of device {event.device_id}")
            return None

        reading = event.message.reading
        try:
            record = SensingRecord.from_reading(reading, partition_key(reading.utc_timestamp_ms))
            record = self.store.insert_record(record)
        except StorageError:
            logger.error(f"Store rejected reading of device {reading.device_id} at {reading.utc_timestamp_ms}")
            raise
        except Exception as e:
            logger.error(f"Store write failed for device {reading.device_id}: {e}")
            raise StorageError(f"Store write failed: {e}") from e

        counters.consumed += 1
        counters.stored += 1
        self.metrics.record_executed(event.received_at_ms)
        return record

    def drain(self) -> List[Optional[SensingRecord]]:
        """Consume every pending event in arrival order"""
        results = []
        while self.pending:
            results.append(self.consume(self.pending.popleft()))
        return results

    def device_ledger(self, device_id: int, expected: int, generated: int, sent: int) -> DeviceLedger:
        counters = self.device_counters(device_id)
        return DeviceLedger(
            device_id=device_id,
            expected=expected,
            generated=generated,
            sent=sent,
            hub_received=counters.hub_received,
            consumed=counters.consumed,
            stored=counters.stored,
        )

    def totals(self) -> Dict[str, int]:
        return {
            "hub_received": sum(c.hub_received for c in self.counters.values()),
            "consumed": sum(c.consumed for c in self.counters.values()),
            "consumer_dropped": sum(c.consumer_dropped for c in self.counters.values()),
            "rejected": self.rejected,
        }
