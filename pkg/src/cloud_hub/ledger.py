"""
Per-hop loss accounting.

A sample can be lost at two hops: on the edge-to-hub channel (edge_loss) or
in the consumer stage that parses and stores it (consumer_loss). Polls that a
stalled gateway never made are reported separately as missed.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, root_validator

from src.utils import LossReport
from src.analysis.loss import loss_rate

class DeviceLedger(BaseModel):
    device_id: Optional[int] = None
    label: Optional[str] = None
    expected: int
    generated: int
    sent: int
    hub_received: int
    consumed: int
    stored: int
    rejected: int = 0

    @root_validator(skip_on_failure=True)
    def validate_conservation(cls, values):
        generated, sent = values["generated"], values["sent"]
        received, consumed, stored = values["hub_received"], values["consumed"], values["stored"]
        if not consumed <= received <= sent <= generated:
            raise ValueError(
                f"Counts violate consumed <= hub_received <= sent <= generated: "
                f"{consumed}, {received}, {sent}, {generated}"
            )
        if stored != consumed:
            raise ValueError(f"Stored ({stored}) must equal consumed ({consumed})")
        if generated > values["expected"]:
            raise ValueError(f"Generated ({generated}) exceeds expected ({values['expected']})")
        return values

    @property
    def missed(self) -> int:
        return self.expected - self.generated

    @property
    def edge_loss(self) -> int:
        return self.sent - self.hub_received

    @property
    def consumer_loss(self) -> int:
        return self.hub_received - self.consumed

    @property
    def total_lost(self) -> int:
        return self.edge_loss + self.consumer_loss

    def loss_report(self) -> LossReport:
        return loss_rate(self.expected, self.stored, label=self.label)

    def summary(self) -> dict:
        data = self.dict()
        data.update(
            missed=self.missed,
            edge_loss=self.edge_loss,
            consumer_loss=self.consumer_loss,
            total_lost=self.total_lost,
        )
        return data

class LossLedger(BaseModel):
    devices: List[DeviceLedger]
    total: DeviceLedger

    @classmethod
    def from_devices(cls, devices: List[DeviceLedger]) -> "LossLedger":
        fields = ["expected", "generated", "sent", "hub_received", "consumed", "stored", "rejected"]
        total = DeviceLedger(label="Total", **{name: sum(getattr(d, name) for d in devices) for name in fields})
        return cls(devices=devices, total=total)

    @classmethod
    def from_counts(cls, rows: List[Dict], hub_received: Optional[Dict[str, int]] = None) -> "LossLedger":
        """
        Ledger from replayed (label, expected, actual) counts.

        Without per-hop counts every lost sample is attributed to the consumer
        stage; pass hub_received per label to split edge and consumer loss.
        """
        devices = []
        for index, row in enumerate(rows, start=1):
            label, expected, actual = row["label"], int(row["expected"]), int(row["actual"])
            # loss_rate raises on overcount before the ledger rejects it
            loss_rate(expected, actual, label=label)
            received = (hub_received or {}).get(label, expected)
            devices.append(DeviceLedger(
                device_id=index,
                label=label,
                expected=expected,
                generated=expected,
                sent=expected,
                hub_received=received,
                consumed=actual,
                stored=actual,
            ))
        return cls.from_devices(devices)

    @property
    def zero_loss(self) -> bool:
        return self.total.total_lost == 0

    @property
    def edge_share(self) -> Optional[float]:
        """edge_loss / total_lost, None for a lossless run"""
        if self.zero_loss:
            return None
        return self.total.edge_loss / self.total.total_lost

    @property
    def consumer_share(self) -> Optional[float]:
        if self.zero_loss:
            return None
        return self.total.consumer_loss / self.total.total_lost

    @property
    def edge_floor_percent(self) -> float:
        """Loss rate the edge hop alone imposes, whatever the consumer tier"""
        return self.total.edge_loss / self.total.expected * 100 if self.total.expected else 0.0

    def loss_reports(self) -> List[LossReport]:
        return [d.loss_report() for d in self.devices] + [self.total.loss_report()]

    def to_json_dict(self) -> dict:
        return {
            "devices": [d.summary() for d in self.devices],
            "total": self.total.summary(),
            "zero_loss": self.zero_loss,
            "edge_share": self.edge_share,
            "consumer_share": self.consumer_share,
        }
