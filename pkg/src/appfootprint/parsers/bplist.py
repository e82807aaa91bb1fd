"""Info.plist parsing: binary "bplist00" or XML property lists.

Binary layout: 8-byte magic, object data, offset table, then a 32-byte
trailer (6 unused/sort bytes, u1 offset-int size, u1 object-ref size,
u8 BE object count, u8 BE top-object index, u8 BE offset-table offset).
Object markers carry the type in the high nibble: 0x0 null/bool, 0x1 int,
0x2 real, 0x3 date, 0x4 data, 0x5 ASCII, 0x6 UTF-16BE, 0xA array, 0xD dict;
a low nibble of 0xF means the count follows as an int object.

Only the top-level dictionary is read. Scalar values become string-rendered
metadata (booleans as "true"/"false"); container and data values are
skipped. Keys ending in "UsageDescription" are the iOS permission surface.
"""

from __future__ import annotations

import datetime
import struct
import xml.etree.ElementTree as ET

from ..model import ManifestData

MAGIC = b"bplist00"
TRAILER_SIZE = 32

_MAC_EPOCH = datetime.datetime(2001, 1, 1, tzinfo=datetime.timezone.utc)

_SKIP = object()  # container or data value: not recorded in metadata


class PlistError(Exception):
    """Base class for plist parsing failures."""


class BadTrailer(PlistError):
    pass


class MalformedXml(PlistError):
    pass


class UnsupportedObjectType(PlistError):
    pass


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float, str)):
        return str(value)
    if isinstance(value, datetime.datetime):
        return value.strftime("%Y-%m-%dT%H:%M:%SZ")
    raise UnsupportedObjectType(f"cannot render {type(value).__name__}")


def _manifest_from_dict(top: dict) -> ManifestData:
    manifest = ManifestData()
    for key, value in top.items():
        if value is _SKIP or value is None:
            continue
        rendered = _render(value)
        manifest.metadata[key] = rendered
        if key.endswith("UsageDescription"):
            manifest.permissions.add(key)
    manifest.package_name = manifest.metadata.get("CFBundleIdentifier", "")
    return manifest


# -- binary form ------------------------------------------------------------


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        if len(buf) < len(MAGIC) + TRAILER_SIZE:
            raise BadTrailer("buffer too small for a binary plist")
        trailer = buf[-TRAILER_SIZE:]
        self.offset_int_size = trailer[6]
        self.ref_size = trailer[7]
        self.num_objects = struct.unpack_from(">Q", trailer, 8)[0]
        self.top_object = struct.unpack_from(">Q", trailer, 16)[0]
        self.table_offset = struct.unpack_from(">Q", trailer, 24)[0]
        if self.offset_int_size not in (1, 2, 3, 4, 8) or self.ref_size not in (1, 2, 3, 4, 8):
            raise BadTrailer("implausible integer sizes in trailer")
        table_end = self.table_offset + self.num_objects * self.offset_int_size
        if self.table_offset < len(MAGIC) or table_end > len(buf):
            raise BadTrailer("offset table out of range")
        if self.top_object >= self.num_objects:
            raise BadTrailer("top object index out of range")

    def _int_at(self, off: int, size: int) -> int:
        chunk = self.buf[off : off + size]
        if len(chunk) != size:
            raise BadTrailer("integer field truncated")
        return int.from_bytes(chunk, "big")

    def object_offset(self, ref: int) -> int:
        if ref >= self.num_objects:
            raise BadTrailer(f"object reference {ref} out of range")
        off = self._int_at(self.table_offset + ref * self.offset_int_size, self.offset_int_size)
        if off >= len(self.buf) - TRAILER_SIZE:
            raise BadTrailer(f"object {ref} offset {off:#x} out of range")
        return off

    def _count(self, marker: int, off: int) -> tuple[int, int]:
        n = marker & 0x0F
        if n != 0x0F:
            return n, off
        sub = self.buf[off]
        if sub >> 4 != 0x1:
            raise UnsupportedObjectType("extended count is not an int object")
        size = 1 << (sub & 0x0F)
        return self._int_at(off + 1, size), off + 1 + size

    def parse_ref(self, ref: int):
        off = self.object_offset(ref)
        marker = self.buf[off]
        kind = marker >> 4
        off += 1
        if kind == 0x0:
            if marker == 0x00:
                return None
            if marker == 0x08:
                return False
            if marker == 0x09:
                return True
            raise UnsupportedObjectType(f"marker 0x{marker:02x}")
        if kind == 0x1:
            size = 1 << (marker & 0x0F)
            if size > 16:
                raise UnsupportedObjectType("oversized integer")
            value = self._int_at(off, size)
            if size >= 8 and value >= 1 << (size * 8 - 1):
                value -= 1 << (size * 8)
            return value
        if kind == 0x2:
            size = 1 << (marker & 0x0F)
            raw = self.buf[off : off + size]
            if size == 4:
                return struct.unpack(">f", raw)[0]
            if size == 8:
                return struct.unpack(">d", raw)[0]
            raise UnsupportedObjectType(f"real of {size} bytes")
        if kind == 0x3:
            if (marker & 0x0F) != 0x3:
                raise UnsupportedObjectType(f"marker 0x{marker:02x}")
            seconds = struct.unpack(">d", self.buf[off : off + 8])[0]
            return _MAC_EPOCH + datetime.timedelta(seconds=seconds)
        if kind == 0x4:
            return _SKIP  # raw data blobs are not manifest scalars
        if kind == 0x5:
            count, off = self._count(marker, off)
            raw = self.buf[off : off + count]
            if len(raw) != count:
                raise BadTrailer("ascii string truncated")
            return raw.decode("ascii", errors="replace")
        if kind == 0x6:
            count, off = self._count(marker, off)
            raw = self.buf[off : off + 2 * count]
            if len(raw) != 2 * count:
                raise BadTrailer("utf-16 string truncated")
            return raw.decode("utf-16-be", errors="replace")
        if kind in (0xA, 0xC, 0xD):
            return _SKIP  # nested containers are not manifest scalars
        raise UnsupportedObjectType(f"marker 0x{marker:02x}")

    def top_dict(self) -> dict:
        off = self.object_offset(self.top_object)
        marker = self.buf[off]
        if marker >> 4 != 0xD:
            raise UnsupportedObjectType("top-level object is not a dictionary")
        count, off = self._count(marker, off + 1)
        refs_end = off + 2 * count * self.ref_size
        if refs_end > len(self.buf) - TRAILER_SIZE:
            raise BadTrailer("dictionary reference table out of range")
        out: dict = {}
        for i in range(count):
            key_ref = self._int_at(off + i * self.ref_size, self.ref_size)
            val_ref = self._int_at(off + (count + i) * self.ref_size, self.ref_size)
            key = self.parse_ref(key_ref)
            if not isinstance(key, str):
                raise UnsupportedObjectType("non-string dictionary key")
            out[key] = self.parse_ref(val_ref)
        return out


def _parse_binary(buf: bytes) -> ManifestData:
    if buf[:8] != MAGIC:
        raise BadTrailer(f"unsupported binary plist version {buf[6:8]!r}")
    try:
        return _manifest_from_dict(_Reader(buf).top_dict())
    except (IndexError, struct.error) as exc:
        raise BadTrailer(f"truncated binary plist: {exc}") from exc


# -- XML form ---------------------------------------------------------------


def _xml_value(el: ET.Element):
    tag = el.tag
    if tag == "string":
        return el.text or ""
    if tag == "true":
        return True
    if tag == "false":
        return False
    if tag == "integer":
        return int(el.text or "0")
    if tag == "real":
        return float(el.text or "0")
    if tag == "date":
        return (el.text or "").strip()  # already ISO-rendered
    if tag in ("dict", "array", "data"):
        return _SKIP
    raise UnsupportedObjectType(f"unknown plist value tag <{tag}>")


def _parse_xml(buf: bytes) -> ManifestData:
    try:
        root = ET.fromstring(buf.decode("utf-8", errors="replace"))
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    if root.tag != "plist":
        raise MalformedXml(f"root element is <{root.tag}>, not <plist>")
    dicts = [child for child in root if child.tag == "dict"]
    if not dicts:
        raise MalformedXml("plist has no top-level <dict>")
    top: dict = {}
    children = list(dicts[0])
    for i in range(0, len(children) - 1, 2):
        key_el, val_el = children[i], children[i + 1]
        if key_el.tag != "key":
            raise MalformedXml("expected <key> element")
        top[key_el.text or ""] = _xml_value(val_el)
    return _manifest_from_dict(top)


def parse_plist(buf: bytes) -> ManifestData:
    """Extract permissions (usage-description keys) and scalar metadata."""
    if buf[:6] == b"bplist":
        return _parse_binary(buf)
    return _parse_xml(buf)
