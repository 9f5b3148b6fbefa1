import json

import numpy as np

from deltakick.output import fmt, read_pgm16, write_csv, write_pgm16, write_sidecar


def test_fmt_roundtrip():
    for x in (0.1, 1 / 3, -2.5e-300, 12345678.912345678):
        assert float(fmt(x)) == x
    assert fmt(7) == "7" and fmt(np.int64(-3)) == "-3" and fmt(True) == "1"


def test_csv_layout(tmp_path):
    path = write_csv(tmp_path / "a.csv", ["x", "y"], [(1, 0.5), (2, 1 / 3)])
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,y" and float(lines[2].split(",")[1]) == 1 / 3


def test_pgm_roundtrip(tmp_path):
    v = np.arange(12, dtype=float).reshape(3, 4)
    _, vmax = write_pgm16(tmp_path / "h.pgm", v)
    img, maxval = read_pgm16(tmp_path / "h.pgm")
    assert vmax == 11 and maxval == 65535
    assert img.shape == (3, 4)
    assert img[-1, 0] == 0 and img[0, -1] == 65535  # momentum increases upwards
    assert np.allclose(img[::-1] / 65535 * vmax, v, atol=vmax / 65535)


def test_sidecar_has_versions(tmp_path):
    write_sidecar(tmp_path / "m.json", {"a": np.float64(1.5), "b": (1, 2)})
    meta = json.loads((tmp_path / "m.json").read_text())
    assert meta["a"] == 1.5 and meta["b"] == [1, 2]
    assert {"numpy", "scipy", "python", "deltakick"} <= set(meta["versions"])
