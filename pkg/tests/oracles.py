"""Reference builders for test fixtures.

Each builder assembles a binary file from a declarative description, written
against the published format documentation and independent of the parsers
under test: the round-trip tests compare parser output against the builder's
input specification.
"""

from __future__ import annotations

import hashlib
import io
import plistlib
import struct
import zipfile
import zlib

# --- dex -------------------------------------------------------------------


def _uleb128(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def build_dex(class_names: list[str], version: bytes = b"035") -> bytes:
    """Assemble a minimal dex defining exactly the given dotted classes."""
    descriptors = sorted("L" + n.replace(".", "/") + ";" for n in class_names)
    n = len(descriptors)
    header_size = 0x70
    string_ids_off = header_size
    type_ids_off = string_ids_off + 4 * n
    class_defs_off = type_ids_off + 4 * n
    data_off = class_defs_off + 0x20 * n

    data = bytearray()
    string_offsets = []
    for desc in descriptors:
        string_offsets.append(data_off + len(data))
        data += _uleb128(len(desc)) + desc.encode("utf-8") + b"\x00"

    string_ids = b"".join(struct.pack("<I", off) for off in string_offsets)
    type_ids = b"".join(struct.pack("<I", i) for i in range(n))
    no_index = 0xFFFFFFFF
    class_defs = b"".join(
        struct.pack("<8I", i, 0x1, no_index, 0, no_index, 0, 0, 0) for i in range(n)
    )

    file_size = data_off + len(data)
    header = bytearray(0x70)
    header[0:8] = b"dex\n" + version + b"\x00"
    struct.pack_into("<I", header, 0x20, file_size)
    struct.pack_into("<I", header, 0x24, header_size)
    struct.pack_into("<I", header, 0x28, 0x12345678)
    struct.pack_into("<II", header, 0x38, n, string_ids_off if n else 0)
    struct.pack_into("<II", header, 0x40, n, type_ids_off if n else 0)
    struct.pack_into("<II", header, 0x60, n, class_defs_off if n else 0)
    struct.pack_into("<II", header, 0x68, len(data), data_off)

    blob = bytearray(header + string_ids + type_ids + class_defs + data)
    blob[12:32] = hashlib.sha1(blob[32:]).digest()
    struct.pack_into("<I", blob, 8, zlib.adler32(bytes(blob[12:])))
    return bytes(blob)


# --- Android binary XML ------------------------------------------------------

ANDROID_NS = "http://schemas.android.com/apk/res/android"

_ATTR_STRING = 0x03
_ATTR_BOOL = 0x12
_ATTR_INT = 0x10
_NO_INDEX = 0xFFFFFFFF


class _StringPool:
    def __init__(self):
        self.strings: list[str] = []
        self.index: dict[str, int] = {}

    def add(self, s: str) -> int:
        if s not in self.index:
            self.index[s] = len(self.strings)
            self.strings.append(s)
        return self.index[s]

    def chunk(self) -> bytes:
        encoded = []
        offsets = []
        pos = 0
        for s in self.strings:
            offsets.append(pos)
            raw = s.encode("utf-16-le")
            entry = struct.pack("<H", len(s)) + raw + b"\x00\x00"
            encoded.append(entry)
            pos += len(entry)
        body = b"".join(encoded)
        if len(body) % 4:
            body += b"\x00" * (4 - len(body) % 4)
        strings_start = 28 + 4 * len(self.strings)
        size = strings_start + len(body)
        header = struct.pack(
            "<HHIIIIII", 0x0001, 28, size, len(self.strings), 0, 0, strings_start, 0
        )
        return header + b"".join(struct.pack("<I", o) for o in offsets) + body


def _attr(pool, ns_idx: int, name: str, value) -> bytes:
    name_idx = pool.add(name)
    if isinstance(value, bool):
        raw, dtype, data = _NO_INDEX, _ATTR_BOOL, 0xFFFFFFFF if value else 0
    elif isinstance(value, int):
        raw, dtype, data = _NO_INDEX, _ATTR_INT, value & 0xFFFFFFFF
    else:
        idx = pool.add(str(value))
        raw, dtype, data = idx, _ATTR_STRING, idx
    return struct.pack("<IIIHBBI", ns_idx, name_idx, raw, 8, 0, dtype, data)


def _start_element(pool, ns_idx: int, name: str, attrs: list[bytes]) -> bytes:
    body = struct.pack(
        "<IIHHHHHH", _NO_INDEX, pool.add(name), 0x14, 0x14, len(attrs), 0, 0, 0
    ) + b"".join(attrs)
    header = struct.pack("<HHIII", 0x0102, 16, 16 + len(body), 1, _NO_INDEX)
    return header + body


def _end_element(pool, name: str) -> bytes:
    return struct.pack("<HHIIIII", 0x0103, 16, 24, 1, _NO_INDEX, _NO_INDEX, pool.add(name))


def build_axml(package: str, permissions: list[str], metadata: dict[str, object]) -> bytes:
    """Compile a manifest description into Android binary XML."""
    pool = _StringPool()
    ns_uri = pool.add(ANDROID_NS)
    pool.add("android")

    chunks = []
    ns_header = struct.pack(
        "<HHIIIII", 0x0100, 16, 24, 1, _NO_INDEX, pool.index["android"], ns_uri
    )
    chunks.append(ns_header)
    chunks.append(_start_element(pool, ns_uri, "manifest", [_attr(pool, _NO_INDEX, "package", package)]))
    for perm in permissions:
        chunks.append(_start_element(pool, ns_uri, "uses-permission", [_attr(pool, ns_uri, "name", perm)]))
        chunks.append(_end_element(pool, "uses-permission"))
    chunks.append(_start_element(pool, ns_uri, "application", []))
    for key, value in metadata.items():
        chunks.append(
            _start_element(
                pool, ns_uri, "meta-data",
                [_attr(pool, ns_uri, "name", key), _attr(pool, ns_uri, "value", value)],
            )
        )
        chunks.append(_end_element(pool, "meta-data"))
    chunks.append(_end_element(pool, "application"))
    chunks.append(_end_element(pool, "manifest"))
    chunks.append(struct.pack("<HHIIIII", 0x0101, 16, 24, 1, _NO_INDEX, pool.index["android"], ns_uri))

    body = pool.chunk() + b"".join(chunks)
    return struct.pack("<HHI", 0x0003, 8, 8 + len(body)) + body


def build_text_manifest(package: str, permissions: list[str], metadata: dict[str, object]) -> bytes:
    """The same manifest description as human-writable text XML."""
    lines = [f'<manifest xmlns:android="{ANDROID_NS}" package="{package}">']
    for perm in permissions:
        lines.append(f'  <uses-permission android:name="{perm}"/>')
    lines.append("  <application>")
    for key, value in metadata.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f'    <meta-data android:name="{key}" android:value="{value}"/>')
    lines.append("  </application>")
    lines.append("</manifest>")
    return "\n".join(lines).encode("utf-8")


# --- property lists ----------------------------------------------------------


def build_xml_plist(top: dict) -> bytes:
    return plistlib.dumps(top, fmt=plistlib.FMT_XML)


def build_binary_plist(top: dict) -> bytes:
    return plistlib.dumps(top, fmt=plistlib.FMT_BINARY)


# --- Mach-O ------------------------------------------------------------------

MH_MAGIC_64 = 0xFEEDFACF
LC_SEGMENT_64 = 0x19
LC_ENCRYPTION_INFO_64 = 0x2C


def build_macho(class_names: list[str], *, cryptid: int = 0) -> bytes:
    """Link a minimal 64-bit Mach-O with an __objc_classname section."""
    payload = b"".join(name.encode("utf-8") + b"\x00" for name in sorted(class_names))

    seg_cmd_size = 72 + 80
    enc_cmd_size = 24
    cmds = []

    has_enc = cryptid >= 0  # always emit the command; cryptid selects state
    sizeofcmds = seg_cmd_size + (enc_cmd_size if has_enc else 0)
    data_off = 32 + sizeofcmds

    section = struct.pack(
        "<16s16sQQIIIIIIII",
        b"__objc_classname",
        b"__TEXT",
        0x100000000,
        len(payload),
        data_off,
        0, 0, 0, 0x02, 0, 0, 0,
    )
    segment = struct.pack(
        "<II16sQQQQiiII",
        LC_SEGMENT_64,
        seg_cmd_size,
        b"__TEXT",
        0x100000000,
        0x4000,
        0,
        data_off + len(payload),
        5, 5, 1, 0,
    )
    cmds.append(segment + section)
    if has_enc:
        cmds.append(struct.pack("<IIIIII", LC_ENCRYPTION_INFO_64, enc_cmd_size, 0x4000, 0x4000, cryptid, 0))

    header = struct.pack(
        "<IiiIIII", MH_MAGIC_64, 0x0100000C, 0, 0x2, len(cmds), sizeofcmds, 0x00200085
    ) + struct.pack("<I", 0)
    return header + b"".join(cmds) + payload


def build_fat(slices: list[bytes]) -> bytes:
    """Wrap thin Mach-O slices in a fat (universal) container."""
    align = 0x1000
    header = struct.pack(">II", 0xCAFEBABE, len(slices))
    arch_entries = []
    blobs = []
    offset = align
    for blob in slices:
        arch_entries.append(struct.pack(">iiIII", 0x0100000C, 0, offset, len(blob), 12))
        blobs.append((offset, blob))
        offset += (len(blob) + align - 1) // align * align
    total = offset
    out = bytearray(total)
    out[0 : len(header)] = header
    pos = len(header)
    for entry in arch_entries:
        out[pos : pos + len(entry)] = entry
        pos += len(entry)
    for off, blob in blobs:
        out[off : off + len(blob)] = blob
    return bytes(out)


def build_macho_32(class_names: list[str]) -> bytes:
    """A 32-bit thin slice, used to exercise fat-slice selection."""
    payload = b"".join(name.encode("utf-8") + b"\x00" for name in sorted(class_names))
    seg_cmd_size = 56 + 68
    data_off = 28 + seg_cmd_size
    section = struct.pack(
        "<16s16sIIIIIIIII",
        b"__objc_classname",
        b"__TEXT",
        0x4000,
        len(payload),
        data_off,
        0, 0, 0, 0x02, 0, 0,
    )
    segment = struct.pack(
        "<II16sIIIIiiII",
        0x01, seg_cmd_size, b"__TEXT", 0x4000, 0x4000, 0, data_off + len(payload), 5, 5, 1, 0
    )
    header = struct.pack("<IiiIIII", 0xFEEDFACE, 12, 0, 0x2, 1, seg_cmd_size, 0)
    return header + segment + section + payload


# --- containers ---------------------------------------------------------------

_FIXED_DATE = (1980, 1, 1, 0, 0, 0)


def build_apk(class_names: list[str], manifest_axml: bytes | None = None) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr(zipfile.ZipInfo("classes.dex", _FIXED_DATE), build_dex(class_names))
        if manifest_axml is not None:
            zf.writestr(zipfile.ZipInfo("AndroidManifest.xml", _FIXED_DATE), manifest_axml)
    return buf.getvalue()


def build_multidex_apk(dex_class_sets: list[list[str]], manifest_axml: bytes | None = None) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for i, names in enumerate(dex_class_sets):
            entry = "classes.dex" if i == 0 else f"classes{i + 1}.dex"
            zf.writestr(zipfile.ZipInfo(entry, _FIXED_DATE), build_dex(names))
        if manifest_axml is not None:
            zf.writestr(zipfile.ZipInfo("AndroidManifest.xml", _FIXED_DATE), manifest_axml)
    return buf.getvalue()


def build_ipa(info_plist: dict, class_names: list[str], *, cryptid: int = 0, app_name: str = "Demo") -> bytes:
    info = dict(info_plist)
    info.setdefault("CFBundleExecutable", app_name)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        base = f"Payload/{app_name}.app"
        zf.writestr(zipfile.ZipInfo(f"{base}/Info.plist", _FIXED_DATE), build_binary_plist(info))
        zf.writestr(
            zipfile.ZipInfo(f"{base}/{info['CFBundleExecutable']}", _FIXED_DATE),
            build_macho(class_names, cryptid=cryptid),
        )
    return buf.getvalue()


def build_empty_zip() -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w"):
        pass
    return buf.getvalue()


# --- HAR ----------------------------------------------------------------------


def build_har(entries: list[dict]) -> dict:
    """Assemble a HAR 1.2 document from simplified entry descriptions.

    Each description: {url, method?, headers?: {name: value},
    query?: {name: value}, body?: str}.
    """
    har_entries = []
    for e in entries:
        request = {
            "method": e.get("method", "GET"),
            "url": e["url"],
            "httpVersion": "HTTP/1.1",
            "headers": [{"name": k, "value": v} for k, v in e.get("headers", {}).items()],
            "queryString": [{"name": k, "value": v} for k, v in e.get("query", {}).items()],
            "cookies": [],
            "headersSize": -1,
            "bodySize": -1,
        }
        if "body" in e:
            request["postData"] = {"mimeType": "text/plain", "text": e["body"]}
        har_entries.append(
            {
                "startedDateTime": "2020-01-15T10:00:00.000Z",
                "time": 10,
                "request": request,
                "response": {
                    "status": 200,
                    "statusText": "OK",
                    "httpVersion": "HTTP/1.1",
                    "headers": [],
                    "cookies": [],
                    "content": {"size": 0, "mimeType": "text/plain"},
                    "redirectURL": "",
                    "headersSize": -1,
                    "bodySize": -1,
                },
                "cache": {},
                "timings": {"send": 1, "wait": 8, "receive": 1},
            }
        )
    return {
        "log": {
            "version": "1.2",
            "creator": {"name": "fixture", "version": "1.0"},
            "entries": har_entries,
        }
    }
