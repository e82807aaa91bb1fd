"""Class-name extraction from Dalvik executable (dex) files.

Only the tables needed to enumerate defined classes are read:

    header (0x70 bytes, little-endian):
        0x00  magic           "dex\\n" + 3-digit version + NUL
        0x38  string_ids_size / 0x3C string_ids_off
        0x40  type_ids_size   / 0x44 type_ids_off
        0x60  class_defs_size / 0x64 class_defs_off

    string_id_item: u4 offset into data -> uleb128 utf16 length + MUTF-8
    bytes, NUL-terminated.
    type_id_item:   u4 descriptor_idx into string_ids.
    class_def_item: 0x20 bytes, first u4 is class_idx into type_ids.

MUTF-8 is decoded as UTF-8 with replacement; class names are ASCII in
practice so fidelity loss is negligible.
"""

from __future__ import annotations

import struct

HEADER_SIZE = 0x70
CLASS_DEF_SIZE = 0x20


class DexError(Exception):
    """Base class for dex parsing failures."""


class BadMagic(DexError):
    pass


class TruncatedFile(DexError):
    pass


class OffsetOutOfBounds(DexError):
    pass


def _read_u4(buf: bytes, off: int) -> int:
    if off + 4 > len(buf):
        raise TruncatedFile(f"u4 read at 0x{off:x} past end of buffer")
    return struct.unpack_from("<I", buf, off)[0]


def _read_uleb128(buf: bytes, off: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if off >= len(buf):
            raise TruncatedFile("uleb128 runs past end of buffer")
        byte = buf[off]
        off += 1
        result |= (byte & 0x7F) << shift
        if byte & 0x80 == 0:
            return result, off
        shift += 7
        if shift > 35:
            raise OffsetOutOfBounds("uleb128 longer than 5 bytes")


def _check_table(buf: bytes, off: int, count: int, entry_size: int, name: str) -> None:
    end = off + count * entry_size
    if off > len(buf) or end > len(buf):
        raise OffsetOutOfBounds(
            f"{name} table [{off:#x}, {end:#x}) exceeds buffer of {len(buf)} bytes"
        )


def _read_string(buf: bytes, data_off: int) -> str:
    if data_off >= len(buf):
        raise OffsetOutOfBounds(f"string data offset {data_off:#x} past end")
    _, start = _read_uleb128(buf, data_off)
    end = buf.find(b"\x00", start)
    if end < 0:
        raise TruncatedFile("unterminated string data")
    return buf[start:end].decode("utf-8", errors="replace")


def extract_dex_class_names(buf: bytes) -> set[str]:
    """Return the dotted names of all classes defined in a dex buffer."""
    if len(buf) < HEADER_SIZE:
        raise TruncatedFile(f"buffer of {len(buf)} bytes is smaller than a dex header")
    if not (
        buf[0:4] == b"dex\n"
        and buf[4:7].isdigit()
        and buf[7:8] == b"\x00"
    ):
        raise BadMagic(f"not a dex header: {buf[0:8]!r}")

    string_ids_size = _read_u4(buf, 0x38)
    string_ids_off = _read_u4(buf, 0x3C)
    type_ids_size = _read_u4(buf, 0x40)
    type_ids_off = _read_u4(buf, 0x44)
    class_defs_size = _read_u4(buf, 0x60)
    class_defs_off = _read_u4(buf, 0x64)

    _check_table(buf, string_ids_off, string_ids_size, 4, "string_ids")
    _check_table(buf, type_ids_off, type_ids_size, 4, "type_ids")
    if class_defs_size:
        _check_table(buf, class_defs_off, class_defs_size, CLASS_DEF_SIZE, "class_defs")

    names: set[str] = set()
    for i in range(class_defs_size):
        class_idx = _read_u4(buf, class_defs_off + i * CLASS_DEF_SIZE)
        if class_idx >= type_ids_size:
            raise OffsetOutOfBounds(f"class_idx {class_idx} >= type_ids_size {type_ids_size}")
        descriptor_idx = _read_u4(buf, type_ids_off + class_idx * 4)
        if descriptor_idx >= string_ids_size:
            raise OffsetOutOfBounds(
                f"descriptor_idx {descriptor_idx} >= string_ids_size {string_ids_size}"
            )
        data_off = _read_u4(buf, string_ids_off + descriptor_idx * 4)
        descriptor = _read_string(buf, data_off)
        # Class descriptors look like "Lcom/foo/Bar;"; anything else in the
        # class_defs table is corrupt but harmless, so it is skipped.
        if len(descriptor) >= 3 and descriptor[0] == "L" and descriptor[-1] == ";":
            names.add(descriptor[1:-1].replace("/", "."))
    return names
