from .channel import LossyChannel
from .gateway import EdgeGateway, DeliveryOutcome, WatchdogStatus

__all__ = ["LossyChannel", "EdgeGateway", "DeliveryOutcome", "WatchdogStatus"]
