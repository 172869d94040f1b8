from .bundle import (
    ExportBundle,
    BUILDING_COLUMNS,
    DEVICE_COLUMNS,
    read_sensing_rows,
    read_bundle,
    write_bundle,
    export_store,
    import_bundle,
)

__all__ = [
    "ExportBundle",
    "BUILDING_COLUMNS",
    "DEVICE_COLUMNS",
    "read_sensing_rows",
    "read_bundle",
    "write_bundle",
    "export_store",
    "import_bundle",
]
