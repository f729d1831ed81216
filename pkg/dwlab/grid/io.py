import struct
from pathlib import Path
from typing import Union

import numpy as np

from dwlab.common.log import get_logger
from dwlab.grid.fields import Domain, FieldType, field_class
from dwlab.grid.spec import GridSpec

logger = get_logger(__name__)

SNAPSHOT_MAGIC = b"DWL1"
# magic, M, L, component count
SNAPSHOT_HEADER = struct.Struct("<4sIdI")


def encode_snapshot(f: FieldType) -> bytes:
    """
    Binary snapshot of a physical-space field.

    Layout: header ``<4sIdI`` then little-endian complex doubles, x slowest,
    components interleaved fastest.
    """
    f._require(Domain.PHYSICAL)
    header = SNAPSHOT_HEADER.pack(
        SNAPSHOT_MAGIC, f.grid.points_per_axis, f.grid.half_period, f.components
    )
    values = f.values if f.components == 1 else np.moveaxis(f.values, 0, -1)
    return header + np.ascontiguousarray(values, dtype="<c16").tobytes()


def decode_snapshot(payload: bytes) -> FieldType:
    if len(payload) < SNAPSHOT_HEADER.size:
        raise ValueError("Snapshot is shorter than its header")
    magic, m, half_period, components = SNAPSHOT_HEADER.unpack_from(payload)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"Not a field snapshot (magic {magic!r})")
    grid = GridSpec(half_period=half_period, points_per_axis=m)
    cls = field_class(components)
    expected = grid.size * components
    data = np.frombuffer(payload, dtype="<c16", offset=SNAPSHOT_HEADER.size)
    if data.size != expected:
        raise ValueError(f"Snapshot carries {data.size} samples, expected {expected}")
    if components == 1:
        values = data.reshape(grid.shape)
    else:
        values = np.moveaxis(data.reshape(grid.shape + (components,)), -1, 0)
    return cls(grid=grid, values=values)


def save_snapshot(f: FieldType, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_suffix(path.suffix + ".tmp")
    temp_path.write_bytes(encode_snapshot(f))
    temp_path.replace(path)
    logger.debug(f"Snapshot written to {path}")
    return path


def load_snapshot(path: Union[str, Path]) -> FieldType:
    return decode_snapshot(Path(path).read_bytes())
