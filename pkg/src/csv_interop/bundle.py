"""
Reader and writer for the three-file data-sharing bundle.

    buildings.csv   Id,BuildingName
    devices.csv     Id,DeviceName,BuildingId
    sensing.csv     Id,UtcTimestampMs,PartitionKey,DeviceId,CollectorId,
                    Humidity,Temperature,CO2,Dust,AirQuality,Vibration

Files are UTF-8 with LF line endings. Sensing rows are written sorted by
(DeviceId, UtcTimestampMs, CollectorId); raw integer encodings are written
verbatim. Missing fields are rejected on import.
"""

import csv
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from src.utils import get_logger, Building, Device, SensingRecord
from src.utils.errors import (
    SchemaMismatch,
    PartitionInconsistent,
    FieldTypeError,
    ForeignKeyViolation,
)
from src.telemetry_store import TelemetryStore, partition_key, SENSING_COLUMNS
from src.telemetry_store.store import record_to_row, row_to_record

logger = get_logger("csv_interop")

BUILDING_COLUMNS = ("Id", "BuildingName")
DEVICE_COLUMNS = ("Id", "DeviceName", "BuildingId")

BUILDINGS_FILE = "buildings.csv"
DEVICES_FILE = "devices.csv"
SENSING_FILE = "sensing.csv"

_INTEGER = re.compile(r"-?[0-9]+")

@dataclass
class ExportBundle:
    buildings: List[Building] = field(default_factory=list)
    devices: List[Device] = field(default_factory=list)
    sensing: List[SensingRecord] = field(default_factory=list)

    def validate(self) -> None:
        """Every device resolves to a building and every sensing row to a device"""
        building_ids = {b.id for b in self.buildings}
        for device in self.devices:
            if device.building_id not in building_ids:
                raise ForeignKeyViolation(f"Device {device.id} references unknown building {device.building_id}")
        device_ids = {d.id for d in self.devices}
        for record in self.sensing:
            if record.device_id not in device_ids:
                raise ForeignKeyViolation(f"Sensing row {record.id} references unknown device {record.device_id}")

def _parse_int(value: str, column: str, line: int, path: Path) -> int:
    if not _INTEGER.fullmatch(value):
        raise FieldTypeError(f"{path}:{line}: {column} must be an integer, got {value!r}", column=column, line=line)
    return int(value)

def _rows(path: Path, columns: Sequence[str]) -> Iterable[tuple]:
    """Yield (line number, fields) after checking the header and each row's width"""
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(header) != tuple(columns):
                raise SchemaMismatch(f"{path}: header {header} does not match {list(columns)}")
            for line, row in enumerate(reader, start=2):
                if len(row) != len(columns):
                    raise SchemaMismatch(f"{path}:{line}: expected {len(columns)} fields, found {len(row)}")
                if any(value == "" for value in row):
                    raise SchemaMismatch(f"{path}:{line}: missing field")
                yield line, row
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        logger.error(f"Cannot read {path}: {e}")
        raise SchemaMismatch(f"Cannot read {path}: {e}") from e

def read_sensing_rows(path: Union[str, Path]) -> List[SensingRecord]:
    """
    Parse a sensing.csv file.

    Raises:
        SchemaMismatch: wrong header or row width, or a missing field
        FieldTypeError: a field is not an integer
        PartitionInconsistent: PartitionKey is not the day of UtcTimestampMs
    """
    path = Path(path)
    records = []
    for line, row in _rows(path, SENSING_COLUMNS):
        values = [_parse_int(value, column, line, path) for value, column in zip(row, SENSING_COLUMNS)]
        record = row_to_record(values)
        if record.utc_timestamp_ms < 0 or record.partition_key != partition_key(record.utc_timestamp_ms):
            raise PartitionInconsistent(
                f"{path}:{line}: PartitionKey {record.partition_key} does not match UtcTimestampMs {record.utc_timestamp_ms}"
            )
        records.append(record)
    return records

def read_bundle(directory: Union[str, Path]) -> ExportBundle:
    directory = Path(directory)
    buildings_path = directory / BUILDINGS_FILE
    devices_path = directory / DEVICES_FILE

    buildings = [
        Building(id=_parse_int(row[0], "Id", line, buildings_path), name=row[1])
        for line, row in _rows(buildings_path, BUILDING_COLUMNS)
    ]
    devices = [
        Device(
            id=_parse_int(row[0], "Id", line, devices_path),
            name=row[1],
            building_id=_parse_int(row[2], "BuildingId", line, devices_path),
        )
        for line, row in _rows(devices_path, DEVICE_COLUMNS)
    ]
    bundle = ExportBundle(buildings, devices, read_sensing_rows(directory / SENSING_FILE))
    logger.info(
        f"Read bundle from {directory}: {len(buildings)} buildings, {len(devices)} devices, "
        f"{len(bundle.sensing)} sensing rows"
    )
    return bundle

def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)

def write_bundle(bundle: ExportBundle, directory: Union[str, Path]) -> List[Path]:
    """
    Write the three bundle files into directory.

    Raises:
        ForeignKeyViolation: a row references a missing device or building
    """
    bundle.validate()
    directory = Path(directory)
    os.makedirs(directory, exist_ok=True)

    paths = [directory / BUILDINGS_FILE, directory / DEVICES_FILE, directory / SENSING_FILE]
    _write_csv(paths[0], BUILDING_COLUMNS, ((b.id, b.name) for b in sorted(bundle.buildings, key=lambda b: b.id)))
    _write_csv(paths[1], DEVICE_COLUMNS, ((d.id, d.name, d.building_id) for d in sorted(bundle.devices, key=lambda d: d.id)))
    sensing = sorted(bundle.sensing, key=lambda r: (r.device_id, r.utc_timestamp_ms, r.collector_id))
    _write_csv(paths[2], SENSING_COLUMNS, (record_to_row(r) for r in sensing))
    logger.info(f"Wrote bundle with {len(sensing)} sensing rows to {directory}")
    return paths

def export_store(store: TelemetryStore, directory: Union[str, Path]) -> List[Path]:
    bundle = ExportBundle(
        buildings=list(store.buildings.values()),
        devices=list(store.devices.values()),
        sensing=store.all_records(),
    )
    return write_bundle(bundle, directory)

def import_bundle(directory: Union[str, Path], store: Optional[TelemetryStore] = None) -> TelemetryStore:
    """
    Load a bundle into a store (a fresh in-memory store by default).

    Record ids are preserved.
    """
    bundle = read_bundle(directory)
    bundle.validate()
    store = store if store is not None else TelemetryStore()
    for building in bundle.buildings:
        store.add_building(building)
    for device in bundle.devices:
        store.add_device(device)
    for record in bundle.sensing:
        store.insert(record)
    logger.info(f"Imported {len(bundle.sensing)} sensing rows into the store")
    return store
