"""CSV, 16-bit PGM and JSON sidecar writers."""

import json
import platform
from pathlib import Path

import numpy as np
import scipy

from . import __version__


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def write_pgm16(path, values):
    """Binary PGM (P5) with max gray 65535; gray = value / max * 65535.

    Row 0 of the image is the highest momentum so the picture reads with
    momentum increasing upwards.
    """
    v = np.asarray(values, dtype=float)
    vmax = float(v.max()) if v.size else 0.0
    scaled = np.zeros(v.shape) if vmax <= 0 else v / vmax * 65535.0
    img = np.rint(np.clip(scaled, 0, 65535)).astype(">u2")[::-1]
    h, w = img.shape
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    return path, vmax


def read_pgm16(path):
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = map(int, parts[1].split())
    maxval = int(parts[2])
    img = np.frombuffer(parts[3], dtype=">u2" if maxval > 255 else "u1").reshape(h, w)
    return img, maxval


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


def versions():
    return {
        "deltakick": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_sidecar(path, meta):
    """JSON metadata next to an output; software versions are always added."""
    meta = dict(meta)
    meta.setdefault("versions", versions())
    path = Path(path)
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return path
