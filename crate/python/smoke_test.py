"""Smoke test for the Python extension.

Build first:

    cargo build -p recordlayout-py --features extension-module --release

then run `python3 python/smoke_test.py`. The built shared library is copied to a
temporary directory as `pyrecordlayout.so` and imported from there.
"""

import importlib
import math
import pathlib
import shutil
import struct
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libpyrecordlayout.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "pyrecordlayout.so")
            sys.path.insert(0, str(tmp))
            return importlib.import_module("pyrecordlayout")
    sys.exit("libpyrecordlayout.so not found; build the extension first")


rl = load_module()


def check_views():
    schema = rl.Schema("Record{Pos:Record{x:f32,y:f32},Id:u16,Flag:bool}")
    assert schema.leaf_count == 4
    assert schema.size_packed == 11
    assert schema.leaves()[2] == ("Id", "u16")

    views = [rl.View(schema, [3, 4], layout) for layout in ("aos-packed", "soa-mb", "aosoa:4", "bytesplit:soa-sb")]
    for v in views:
        v.set([2, 1], "Pos.y", 1.25)
        v.set([2, 1], "Id", 65535 + 2)  # truncates like a u16 cast
        v.set([0, 3], "Flag", True)
    for v in views:
        assert v.get([2, 1], "Pos.y") == 1.25, v
        assert v.get([2, 1], "Id") == 1, v
        assert v.get([0, 3], "Flag") is True, v
        assert v.record([2, 1]) == [0.0, 1.25, 1, False], v
    assert views[1].blob_sizes() == [48, 48, 24, 12]

    copy = rl.View(str(schema), [3, 4], "aos-aligned")
    copy.copy_from(views[2])
    assert copy.get([2, 1], "Pos.y") == 1.25

    fixed = rl.View(schema, [3, 4])
    assert fixed.trivially_relocatable and fixed.accounted_state_bytes == 12 * 11
    dynamic = rl.View(schema, [3, 4], dynamic=True)
    assert not dynamic.trivially_relocatable

    with tempfile.TemporaryDirectory() as d:
        views[0].dump(d, "v")
        back = rl.View.restore(d, "v")
        assert back.layout == "aos-packed" and back.get([2, 1], "Pos.y") == 1.25

    try:
        rl.View(schema, [2], "zig")
    except rl.LayoutError:
        pass
    else:
        raise AssertionError("bad layout accepted")
    try:
        views[0].get([3, 0], "Id")
    except IndexError:
        pass
    else:
        raise AssertionError("out-of-range index accepted")


def check_codecs():
    for x in (0.0, 1.0, -2.5, 65504.0, 6.1e-5, 3.0e-8):
        native = struct.unpack("<H", struct.pack("<e", x))[0]
        assert rl.float_encode(x, 5, 10) == native, x
        assert rl.float_decode(native, 5, 10) == struct.unpack("<e", struct.pack("<H", native))[0]
    assert rl.float_encode(1e30, 5, 10) == 0x7C00
    assert math.isnan(rl.float_decode(0x7E00, 5, 10))
    assert rl.pack_int(-3, 4) == 0b1101
    assert rl.unpack_int(0b1101, 4) == -3
    assert rl.unpack_int(0b1101, 4, signed=False) == 13

    packed = rl.View("Record{v:i16}", [8], "bitpack-int:5")
    packed.set([7], "v", -9)
    assert packed.get([7], "v") == -9
    assert packed.blob_sizes() == [8]


def check_nbody():
    result = rl.run_nbody("soa-mb", n=64, steps=2, simd_width=4, precision="f64")
    assert [r[1] for r in result["rows"]] == ["update", "move"]
    reference = rl.run_nbody("baseline-aos", n=64, steps=2, precision="f64")
    assert result["checksum"] == reference["checksum"]


if __name__ == "__main__":
    check_views()
    check_codecs()
    check_nbody()
    print("python smoke test: ok")
