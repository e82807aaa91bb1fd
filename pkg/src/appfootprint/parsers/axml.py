"""AndroidManifest.xml parsing: binary AXML chunks or plain-text XML.

Binary layout (all little-endian), per frameworks/base ResourceTypes.h:

    file header:   u2 type=0x0003, u2 headerSize=8, u4 fileSize
    string pool:   u2 type=0x0001, u2 headerSize=28, u4 size,
                   u4 stringCount, u4 styleCount, u4 flags (0x100 = UTF-8),
                   u4 stringsStart, u4 stylesStart,
                   u4 offsets[stringCount] relative to stringsStart
    namespaces:    0x0100 (start) / 0x0101 (end)
    elements:      0x0102 (start) / 0x0103 (end); start-element body is
                   u4 ns, u4 name, u2 attrStart, u2 attrSize, u2 attrCount,
                   u2 id, u2 class, u2 style, then attrCount * 20-byte
                   attributes (u4 ns, u4 name, u4 rawValue,
                   u2 size, u1 res0, u1 dataType, u4 data)

Plain-text XML is accepted as well so fixtures stay human-writable.
"""

from __future__ import annotations

import struct
import xml.etree.ElementTree as ET

from ..model import ManifestData

CHUNK_XML = 0x0003
CHUNK_STRING_POOL = 0x0001
CHUNK_START_ELEMENT = 0x0102

UTF8_FLAG = 0x0100
ANDROID_NS = "http://schemas.android.com/apk/res/android"

TYPE_REFERENCE = 0x01
TYPE_STRING = 0x03
TYPE_INT_DEC = 0x10
TYPE_INT_HEX = 0x11
TYPE_INT_BOOLEAN = 0x12

PERMISSION_ELEMENTS = ("uses-permission", "uses-permission-sdk-23")


class AxmlError(Exception):
    """Base class for manifest parsing failures."""


class BadChunkHeader(AxmlError):
    pass


class StringPoolCorrupt(AxmlError):
    pass


class NotXml(AxmlError):
    pass


def _u2(buf: bytes, off: int) -> int:
    if off + 2 > len(buf):
        raise BadChunkHeader(f"u2 read at {off:#x} past end")
    return struct.unpack_from("<H", buf, off)[0]


def _u4(buf: bytes, off: int) -> int:
    if off + 4 > len(buf):
        raise BadChunkHeader(f"u4 read at {off:#x} past end")
    return struct.unpack_from("<I", buf, off)[0]


def _pool_strings(buf: bytes, chunk_off: int, chunk_size: int) -> list[str]:
    count = _u4(buf, chunk_off + 8)
    flags = _u4(buf, chunk_off + 16)
    strings_start = _u4(buf, chunk_off + 20)
    if count > chunk_size or strings_start > chunk_size:
        raise StringPoolCorrupt("string pool counts exceed chunk size")
    offsets_off = chunk_off + 28
    if offsets_off + 4 * count > chunk_off + chunk_size:
        raise StringPoolCorrupt("string offset table exceeds chunk")
    data_base = chunk_off + strings_start
    utf8 = bool(flags & UTF8_FLAG)

    out: list[str] = []
    for i in range(count):
        rel = _u4(buf, offsets_off + 4 * i)
        pos = data_base + rel
        if pos >= chunk_off + chunk_size or pos >= len(buf):
            raise StringPoolCorrupt(f"string {i} offset {rel:#x} out of range")
        try:
            if utf8:
                out.append(_utf8_entry(buf, pos))
            else:
                out.append(_utf16_entry(buf, pos))
        except (IndexError, struct.error, UnicodeDecodeError) as exc:
            raise StringPoolCorrupt(f"string {i} undecodable: {exc}") from exc
    return out


def _utf16_entry(buf: bytes, pos: int) -> str:
    length = _u2(buf, pos)
    pos += 2
    if length & 0x8000:
        length = ((length & 0x7FFF) << 16) | _u2(buf, pos)
        pos += 2
    end = pos + 2 * length
    if end > len(buf):
        raise StringPoolCorrupt("utf-16 string runs past buffer")
    return buf[pos:end].decode("utf-16-le", errors="replace")


def _utf8_entry(buf: bytes, pos: int) -> str:
    # two lengths: utf-16 char count, then byte count, each 1 or 2 bytes
    def ln(p: int) -> tuple[int, int]:
        v = buf[p]
        if v & 0x80:
            return ((v & 0x7F) << 8) | buf[p + 1], p + 2
        return v, p + 1

    _, pos = ln(pos)
    nbytes, pos = ln(pos)
    end = pos + nbytes
    if end > len(buf):
        raise StringPoolCorrupt("utf-8 string runs past buffer")
    return buf[pos:end].decode("utf-8", errors="replace")


def _render_value(pool: list[str], raw_idx: int, dtype: int, data: int) -> str:
    if dtype == TYPE_STRING:
        idx = data if data != 0xFFFFFFFF else raw_idx
        if idx >= len(pool):
            raise StringPoolCorrupt(f"attribute string index {idx} out of range")
        return pool[idx]
    if dtype == TYPE_INT_BOOLEAN:
        return "true" if data else "false"
    if dtype == TYPE_INT_DEC:
        return str(struct.unpack("<i", struct.pack("<I", data))[0])
    if dtype == TYPE_INT_HEX:
        return f"0x{data:08x}"
    if dtype == TYPE_REFERENCE:
        # resource indirection is not resolved; keep the raw reference
        return f"@0x{data:08x}"
    if raw_idx != 0xFFFFFFFF and raw_idx < len(pool):
        return pool[raw_idx]
    return str(data)


def _parse_binary(buf: bytes) -> ManifestData:
    file_size = _u4(buf, 4)
    if file_size < 8 or file_size > len(buf):
        raise BadChunkHeader(f"declared file size {file_size} vs buffer {len(buf)}")

    pool: list[str] | None = None
    manifest = ManifestData()
    off = 8
    while off + 8 <= file_size:
        ctype = _u2(buf, off)
        csize = _u4(buf, off + 4)
        if csize < 8 or off + csize > file_size:
            raise BadChunkHeader(f"chunk at {off:#x} has size {csize}")
        if ctype == CHUNK_STRING_POOL:
            pool = _pool_strings(buf, off, csize)
        elif ctype == CHUNK_START_ELEMENT:
            if pool is None:
                raise StringPoolCorrupt("element chunk before string pool")
            _parse_element(buf, off, csize, pool, manifest)
        off += csize
    if pool is None:
        raise BadChunkHeader("no string pool chunk found")
    return manifest


def _parse_element(
    buf: bytes, off: int, csize: int, pool: list[str], manifest: ManifestData
) -> None:
    header_size = _u2(buf, off + 2)
    body = off + header_size
    name_idx = _u4(buf, body + 4)
    if name_idx >= len(pool):
        raise StringPoolCorrupt(f"element name index {name_idx} out of range")
    name = pool[name_idx]
    attr_start = _u2(buf, body + 8)
    attr_size = _u2(buf, body + 10)
    attr_count = _u2(buf, body + 12)
    if attr_size < 20 or body + attr_start + attr_count * attr_size > off + csize:
        raise BadChunkHeader(f"attributes of <{name}> exceed chunk")

    attrs: dict[str, str] = {}
    for i in range(attr_count):
        a = body + attr_start + i * attr_size
        attr_name_idx = _u4(buf, a + 4)
        raw_idx = _u4(buf, a + 8)
        dtype = buf[a + 15] if a + 15 < len(buf) else 0
        data = _u4(buf, a + 16)
        if attr_name_idx >= len(pool):
            raise StringPoolCorrupt(f"attribute name index {attr_name_idx} out of range")
        attrs[pool[attr_name_idx]] = _render_value(pool, raw_idx, dtype, data)

    _collect(name, attrs, manifest)


def _collect(element: str, attrs: dict[str, str], manifest: ManifestData) -> None:
    if element == "manifest" and attrs.get("package"):
        manifest.package_name = attrs["package"]
    elif element in PERMISSION_ELEMENTS:
        perm = attrs.get("name", "").strip()
        if perm:
            manifest.permissions.add(perm)
    elif element == "meta-data":
        key = attrs.get("name", "").strip()
        if key:
            value = attrs.get("value")
            if value is None:
                value = attrs.get("resource", "")
            manifest.metadata[key] = value


def _parse_text(buf: bytes) -> ManifestData:
    try:
        root = ET.fromstring(buf.decode("utf-8", errors="replace"))
    except ET.ParseError as exc:
        raise NotXml(f"not parseable as text XML: {exc}") from exc
    manifest = ManifestData()
    ns_name = f"{{{ANDROID_NS}}}name"
    ns_value = f"{{{ANDROID_NS}}}value"
    ns_resource = f"{{{ANDROID_NS}}}resource"
    if root.tag == "manifest":
        manifest.package_name = root.get("package", "")
    for el in root.iter():
        if el.tag in PERMISSION_ELEMENTS:
            perm = (el.get(ns_name) or el.get("name") or "").strip()
            if perm:
                manifest.permissions.add(perm)
        elif el.tag == "meta-data":
            key = (el.get(ns_name) or el.get("name") or "").strip()
            if key:
                value = el.get(ns_value, el.get("value"))
                if value is None:
                    value = el.get(ns_resource, el.get("resource", ""))
                manifest.metadata[key] = value
    return manifest


def parse_android_manifest(buf: bytes) -> ManifestData:
    """Extract permissions, meta-data pairs, and the package name."""
    if len(buf) >= 8 and _u2(buf, 0) == CHUNK_XML:
        return _parse_binary(buf)
    stripped = buf.lstrip(b"\xef\xbb\xbf \t\r\n")
    if stripped.startswith(b"<"):
        return _parse_text(buf)
    raise NotXml("neither binary AXML nor text XML")
