import dataclasses
import importlib.metadata
import json
import os
import tempfile
import zlib
from enum import Enum
from hashlib import sha256
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from dwlab.common.log import get_logger

# name constants
REPORTS_DIR_NAME = "reports"
SOLVES_DIR_NAME = "solves"
MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary"

# env constants
THREADS_ENV = "DWL_THREADS"
FFT_WORKERS_ENV = "DWL_FFT_WORKERS"

logger = get_logger(__name__)


class ConfigError(ValueError):
    """Raised when a run configuration cannot be loaded or validated."""


class NumericalError(RuntimeError):
    """Raised when a numerical construction is impossible on the given lattice."""


def package_version(package_name: str) -> Optional[str]:
    """
    Return the installed version of the distribution ``package_name`` (e.g.
    ``"scikit-learn"``) or :obj:`None`.
    """
    try:
        return importlib.metadata.version(package_name)
    except importlib.metadata.PackageNotFoundError:
        return None


def load_json(path: Union[str, Path]) -> Any:
    """
    Load a json file provided in input.

    Args:
        path (`Union[str, Path]`): The path to the json file to load.

    Returns:
        `Any`: The loaded json file.
    """
    with open(path, encoding="utf8") as f:
        return json.load(f)


def atomic_write_text(text: str, path: Union[str, Path]) -> Path:
    """
    Write ``text`` to ``path`` through a temporary file in the same directory
    and an :func:`os.replace`, so readers never observe a partial file.

    Args:
        text (:obj:`str`): The content to write.
        path (:obj:`str`, :obj:`Path`): Destination path.

    Returns:
        :obj:`Path`: The destination path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        mode="w", encoding="utf8", dir=path.parent, delete=False, suffix=".tmp"
    ) as temp_file:
        temp_file.write(text)
    os.replace(temp_file.name, path)
    return path


def dump_json(document: Any, path: Union[str, Path], indent: Optional[int] = 2):
    """
    Dump input to json file, atomically.

    Args:
        document (`Any`): The document to dump.
        path (`Union[str, Path]`): The path to dump the document to.
        indent (`Optional[int]`): The indent to use for the json file.
    """
    atomic_write_text(json.dumps(to_config(document), indent=indent), path)


def text_digest(text: str) -> str:
    """sha256 hex digest of a string."""
    return sha256(text.encode("utf-8")).hexdigest()


def stable_seed(seed: int, name: str) -> int:
    """
    Derive a per-task seed from a run seed and a task name.

    The derivation does not depend on ``PYTHONHASHSEED`` or on scheduling order.
    """
    return (int(seed) * 1_000_003 + zlib.crc32(name.encode("utf-8"))) % (2**32)


def resolve_threads(configured: Optional[int] = None) -> int:
    """
    Worker pool size: ``DWL_THREADS`` wins over the configured value.
    """
    env_value = os.getenv(THREADS_ENV)
    if env_value:
        try:
            threads = int(env_value)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV}={env_value!r} is not an integer") from e
    else:
        threads = configured if configured is not None else 1
    if threads < 1:
        raise ConfigError(f"Worker pool size must be >= 1, got {threads}")
    return threads


def fft_workers() -> int:
    """Number of workers passed to :mod:`scipy.fft` calls."""
    return int(os.getenv(FFT_WORKERS_ENV, "1"))


def coerce_sign(theta: Union[int, str]) -> int:
    """
    Normalise a propagation sign to ``+1`` or ``-1``.

    Args:
        theta (:obj:`int` or :obj:`str`): one of ``+1``, ``-1``, ``"+"``, ``"-"``.
    """
    match theta:
        case 1 | "+" | "+1":
            return 1
        case -1 | "-" | "-1":
            return -1
        case _:
            raise ValueError(f"Sign must be one of +1, -1, '+', '-', got {theta!r}")


def to_config(object_to_save: Any) -> Any:
    """
    Convert an object to a JSON-ready structure.

    Returns:
        `Any`: dictionaries, lists and scalars only.
    """

    def obj_to_dict(obj):
        match obj:
            case dict():
                return {str(k): obj_to_dict(v) for k, v in obj.items()}

            case list() | tuple():
                return [obj_to_dict(x) for x in obj]

            case Enum():
                return obj.value

            case np.ndarray():
                return obj_to_dict(obj.tolist())

            case np.generic():
                return obj_to_dict(obj.item())

            case complex():
                return {"re": obj.real, "im": obj.imag}

            case Path():
                return str(obj)

            case _ if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
                if hasattr(obj, "to_dict"):
                    return obj_to_dict(obj.to_dict())
                return {
                    f.name: obj_to_dict(getattr(obj, f.name))
                    for f in dataclasses.fields(obj)
                    if not f.name.startswith("_")
                }

            case _:
                return obj

    return obj_to_dict(object_to_save)


def format_float(value: float) -> str:
    """Deterministic text form of a float for CSV output."""
    if value is None:
        return ""
    return repr(float(value))
