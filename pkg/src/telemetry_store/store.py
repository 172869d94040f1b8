"""
Partitioned time-series store for sensing records.

On-disk layout under the store root:

    catalog.json            buildings, devices, next id, records per partition
    partitions/<key>.csv    one file per partition key (days since 1970-01-01 UTC)

Partition files share the sensing.csv column layout and are replaced
atomically, so readers never see a half-written partition.
"""

import bisect
import csv
import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from tenacity import retry, stop_after_attempt, wait_exponential, retry_if_exception_type

from src.utils import get_logger, SensingRecord, Building, Device
from src.utils.errors import (
    StorageError,
    DuplicateSample,
    ForeignKeyViolation,
    UnknownDevice,
    PartitionInconsistent,
    InputValidationError,
)

logger = get_logger("telemetry_store")

MS_PER_DAY = 86_400_000

SENSING_COLUMNS = (
    "Id", "UtcTimestampMs", "PartitionKey", "DeviceId", "CollectorId",
    "Humidity", "Temperature", "CO2", "Dust", "AirQuality", "Vibration",
)

def partition_key(utc_ms: int) -> int:
    """Days since 1970-01-01 UTC"""
    if utc_ms < 0:
        raise ValueError(f"Timestamps before the epoch are not supported: {utc_ms}")
    return utc_ms // MS_PER_DAY

def record_to_row(record: SensingRecord) -> List[int]:
    return [
        record.id, record.utc_timestamp_ms, record.partition_key, record.device_id,
        record.collector_id, record.humidity_raw, record.temperature_raw, record.co2_ppm,
        record.dust_pcs_per_l, record.air_quality_code, record.vibration_count,
    ]

def row_to_record(values: List[int]) -> SensingRecord:
    return SensingRecord(*values)

class _DeviceSlice:
    """Records of one device inside one partition, kept sorted by timestamp"""

    __slots__ = ("timestamps", "records", "sorted")

    def __init__(self):
        self.timestamps: List[int] = []
        self.records: List[SensingRecord] = []
        self.sorted = True

    def append(self, record: SensingRecord):
        if self.timestamps and record.utc_timestamp_ms < self.timestamps[-1]:
            self.sorted = False
        self.timestamps.append(record.utc_timestamp_ms)
        self.records.append(record)

    def ensure_sorted(self):
        if not self.sorted:
            self.records.sort(key=lambda r: (r.utc_timestamp_ms, r.collector_id))
            self.timestamps = [r.utc_timestamp_ms for r in self.records]
            self.sorted = True

class _Partition:
    __slots__ = ("key", "devices", "sample_keys")

    def __init__(self, key: int):
        self.key = key
        self.devices: Dict[int, _DeviceSlice] = {}
        self.sample_keys: Set[Tuple[int, int, int]] = set()

    def __len__(self):
        return len(self.sample_keys)

    def add(self, record: SensingRecord):
        device_slice = self.devices.get(record.device_id)
        if device_slice is None:
            device_slice = self.devices[record.device_id] = _DeviceSlice()
        device_slice.append(record)
        self.sample_keys.add(record.sample_key)

    def records(self) -> Iterable[SensingRecord]:
        for device_slice in self.devices.values():
            yield from device_slice.records

class TelemetryStore:
    """
    Embedded sensing store with one writer (the hub consumer) and any number of readers
    """

    def __init__(self, root: Optional[Union[str, Path]] = None):
        self.root = Path(root) if root else None
        self.buildings: Dict[int, Building] = {}
        self.devices: Dict[int, Device] = {}
        self._partitions: Dict[int, _Partition] = {}
        self._sizes: Dict[int, int] = {}
        self._unloaded: Set[int] = set()
        self._dirty: Set[int] = set()
        self._ids: Dict[int, int] = {}  # record id -> partition key
        self._ids_complete = True
        self._next_id = 1
        self._lock = threading.RLock()
        # Pruning instrumentation: partitions touched by range queries
        self.partitions_read = 0
        self.last_query_partitions: List[int] = []

    # -- metadata -----------------------------------------------------------

    def add_building(self, building: Building) -> Building:
        with self._lock:
            if building.id in self.buildings:
                raise StorageError(f"Building {building.id} already exists")
            self.buildings[building.id] = building
            return building

    def add_device(self, device: Device) -> Device:
        with self._lock:
            if device.id in self.devices:
                raise StorageError(f"Device {device.id} already exists")
            if device.building_id not in self.buildings:
                raise ForeignKeyViolation(
                    f"Device {device.id} references unknown building {device.building_id}"
                )
            self.devices[device.id] = device
            return device

    def device_ids(self) -> List[int]:
        return sorted(self.devices)

    # -- writes -------------------------------------------------------------

    def insert(self, record: SensingRecord) -> int:
        """
        Insert a record and return its id. Records without an id get the next dense id.
        """
        return self.insert_record(record).id

    def insert_record(self, record: SensingRecord) -> SensingRecord:
        """Insert a record and return it as stored, id included"""
        with self._lock:
            expected_key = partition_key(record.utc_timestamp_ms)
            if record.partition_key != expected_key:
                raise PartitionInconsistent(
                    f"Record at {record.utc_timestamp_ms} carries partition key "
                    f"{record.partition_key}, expected {expected_key}"
                )
            if record.device_id not in self.devices:
                raise ForeignKeyViolation(f"Record references unknown device {record.device_id}")

            partition = self._partition(expected_key, create=True)
            if record.sample_key in partition.sample_keys:
                raise DuplicateSample(
                    f"Sample already stored for device {record.device_id}, "
                    f"collector {record.collector_id} at {record.utc_timestamp_ms}"
                )

            if record.id is None:
                record_id = self._next_id
                record = SensingRecord(record_id, *record_to_row(record)[1:])
            else:
                record_id = record.id
                if self._has_id(record_id):
                    raise DuplicateSample(f"Record id {record_id} already stored")

            partition.add(record)
            self._ids[record_id] = expected_key
            self._next_id = max(self._next_id, record_id + 1)
            self._sizes[expected_key] = len(partition)
            self._dirty.add(expected_key)
            return record

    # -- reads --------------------------------------------------------------

    def query_range(self, device_id: int, t0_ms: int, t1_ms: int) -> List[SensingRecord]:
        """
        Records of one device with t0 <= timestamp < t1, ascending by timestamp.

        Only partitions intersecting [t0, t1) are touched.
        """
        if t0_ms > t1_ms:
            raise InputValidationError(f"Empty range: t0 {t0_ms} is after t1 {t1_ms}")
        with self._lock:
            if device_id not in self.devices:
                raise UnknownDevice(f"Unknown device {device_id}")
            self.last_query_partitions = []
            if t0_ms == t1_ms:
                return []

            result: List[SensingRecord] = []
            first_key = partition_key(max(t0_ms, 0))
            last_key = partition_key(max(t1_ms - 1, 0))
            for key in range(first_key, last_key + 1):
                partition = self._partition(key)
                if partition is None:
                    continue
                self.partitions_read += 1
                self.last_query_partitions.append(key)
                device_slice = partition.devices.get(device_id)
                if device_slice is None:
                    continue
                device_slice.ensure_sorted()
                lo = bisect.bisect_left(device_slice.timestamps, t0_ms)
                hi = bisect.bisect_left(device_slice.timestamps, t1_ms)
                result.extend(device_slice.records[lo:hi])
            return result

    def get(self, record_id: int) -> Optional[SensingRecord]:
        with self._lock:
            if not self._ids_complete:
                self._load_all()
            key = self._ids.get(record_id)
            if key is None:
                return None
            partition = self._partition(key)
            return next((r for r in partition.records() if r.id == record_id), None)

    def count(self) -> int:
        with self._lock:
            return sum(self._sizes.values())

    def partition_keys(self) -> List[int]:
        with self._lock:
            return sorted(self._sizes)

    def all_records(self) -> List[SensingRecord]:
        """Every record, ordered by (device, timestamp, collector)"""
        with self._lock:
            self._load_all()
            records = [r for p in self._partitions.values() for r in p.records()]
        records.sort(key=lambda r: (r.device_id, r.utc_timestamp_ms, r.collector_id))
        return records

    # -- persistence --------------------------------------------------------

    def flush(self) -> None:
        """Write the catalog and every changed partition to disk"""
        if self.root is None:
            return
        with self._lock:
            partitions_dir = self.root / "partitions"
            try:
                partitions_dir.mkdir(parents=True, exist_ok=True)
                for key in sorted(self._dirty):
                    self._atomic_write(partitions_dir / f"{key}.csv", self._render_partition(key))
                self._atomic_write(self.root / "catalog.json", self._render_catalog())
            except OSError as e:
                logger.error(f"Failed to flush store at {self.root}: {e}")
                raise StorageError(f"Failed to flush store at {self.root}: {e}") from e
            logger.info(f"Flushed {len(self._dirty)} partitions to {partitions_dir}")
            self._dirty.clear()

    @classmethod
    def open(cls, root: Union[str, Path]) -> "TelemetryStore":
        """Open an existing store. Partitions are loaded on first access."""
        root = Path(root)
        catalog_path = root / "catalog.json"
        if not catalog_path.exists():
            raise StorageError(f"No store catalog at {catalog_path}")
        store = cls(root)
        try:
            catalog = json.loads(catalog_path.read_text(encoding="utf-8"))
            for item in catalog["buildings"]:
                store.add_building(Building(**item))
            for item in catalog["devices"]:
                store.add_device(Device(**item))
            store._next_id = int(catalog["next_id"])
            store._sizes = {int(key): int(size) for key, size in catalog["partitions"].items()}
        except (OSError, ValueError, KeyError, TypeError, AttributeError) as e:
            logger.error(f"Corrupt store catalog {catalog_path}: {e}")
            raise StorageError(f"Corrupt store catalog {catalog_path}: {e}") from e
        store._unloaded = set(store._sizes)
        store._ids_complete = not store._unloaded
        logger.info(f"Opened store at {root}: {store.count()} records in {len(store._sizes)} partitions")
        return store

    @retry(
        stop=stop_after_attempt(3),
        wait=wait_exponential(multiplier=0.05, min=0.05, max=1),
        retry=retry_if_exception_type(OSError),
        reraise=True
    )
    def _atomic_write(self, path: Path, content: str) -> None:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(content)
            os.replace(tmp_name, path)
        except OSError:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise

    def _render_partition(self, key: int) -> str:
        partition = self._partitions[key]
        records = sorted(partition.records(), key=lambda r: (r.device_id, r.utc_timestamp_ms, r.collector_id))
        lines = [",".join(SENSING_COLUMNS)]
        lines.extend(",".join(str(v) for v in record_to_row(r)) for r in records)
        return "\n".join(lines) + "\n"

    def _render_catalog(self) -> str:
        catalog = {
            "buildings": [b.dict() for b in sorted(self.buildings.values(), key=lambda b: b.id)],
            "devices": [d.dict() for d in sorted(self.devices.values(), key=lambda d: d.id)],
            "next_id": self._next_id,
            "partitions": {str(key): self._sizes[key] for key in sorted(self._sizes)},
        }
        return json.dumps(catalog, indent=2, sort_keys=True) + "\n"

    def _partition(self, key: int, create: bool = False) -> Optional[_Partition]:
        if key in self._unloaded:
            self._load_partition(key)
        partition = self._partitions.get(key)
        if partition is None and create:
            partition = self._partitions[key] = _Partition(key)
        return partition

    def _load_partition(self, key: int) -> None:
        path = self.root / "partitions" / f"{key}.csv"
        partition = _Partition(key)
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                reader = csv.reader(handle)
                header = next(reader, None)
                if header is None or tuple(header) != SENSING_COLUMNS:
                    raise StorageError(f"Partition file {path} has an unexpected header")
                for row in reader:
                    record = row_to_record([int(v) for v in row])
                    partition.add(record)
                    self._ids[record.id] = key
        except (OSError, ValueError, TypeError, csv.Error) as e:
            logger.error(f"Failed to load partition {key} from {path}: {e}")
            raise StorageError(f"Failed to load partition {key}: {e}") from e
        self._partitions[key] = partition
        self._unloaded.discard(key)
        self._ids_complete = not self._unloaded

    def _load_all(self) -> None:
        for key in sorted(self._unloaded):
            self._load_partition(key)

    def _has_id(self, record_id: int) -> bool:
        if record_id in self._ids:
            return True
        if not self._ids_complete:
            self._load_all()
            return record_id in self._ids
        return False
