"""Objective-C class-name extraction from Mach-O binaries.

Reads the ``__objc_classname`` section (NUL-terminated C strings) without
chasing ``__objc_classlist`` pointers, and honours FairPlay encryption:
if any LC_ENCRYPTION_INFO(_64) command has cryptid != 0 the binary cannot
be read statically and the ENCRYPTED sentinel is returned so the caller can
fall back to an externally produced class dump.

Relevant structures (little-endian on file for current CPUs):

    mach_header_64: u4 magic 0xfeedfacf, cputype, cpusubtype, filetype,
                    ncmds, sizeofcmds, flags, reserved        (32 bytes)
    load_command:   u4 cmd, u4 cmdsize
    LC_SEGMENT_64 (0x19): segname[16], vmaddr/vmsize/fileoff/filesize u8,
                    maxprot/initprot u4, nsects u4, flags u4; followed by
                    nsects * section_64 (80 bytes: sectname[16], segname[16],
                    addr u8, size u8, offset u4, ...)
    LC_ENCRYPTION_INFO (0x21) / _64 (0x2c): cryptoff, cryptsize, cryptid

Fat binaries (big-endian 0xcafebabe header) are unwrapped by taking the
first 64-bit slice.
"""

from __future__ import annotations

import struct

MH_MAGIC_64 = 0xFEEDFACF
MH_CIGAM_64 = 0xCFFAEDFE
MH_MAGIC_32 = 0xFEEDFACE
MH_CIGAM_32 = 0xCEFAEDFE
FAT_MAGIC = 0xCAFEBABE

LC_SEGMENT = 0x01
LC_SEGMENT_64 = 0x19
LC_ENCRYPTION_INFO = 0x21
LC_ENCRYPTION_INFO_64 = 0x2C

CLASSNAME_SECTION = b"__objc_classname"


class MachoError(Exception):
    """Base class for Mach-O parsing failures."""


class BadMagic(MachoError):
    pass


class TruncatedLoadCommands(MachoError):
    pass


class Encrypted:
    """Sentinel: binary is FairPlay-encrypted, class names unavailable."""

    def __repr__(self) -> str:  # pragma: no cover
        return "ENCRYPTED"


ENCRYPTED = Encrypted()


def _u4(buf: bytes, off: int, endian: str) -> int:
    if off + 4 > len(buf):
        raise TruncatedLoadCommands(f"u4 read at {off:#x} past end")
    return struct.unpack_from(endian + "I", buf, off)[0]


def _select_fat_slice(buf: bytes) -> bytes:
    nfat = _u4(buf, 4, ">")
    if nfat > 64:
        raise TruncatedLoadCommands(f"implausible fat arch count {nfat}")
    first_slice: bytes | None = None
    for i in range(nfat):
        base = 8 + i * 20
        offset = _u4(buf, base + 8, ">")
        size = _u4(buf, base + 12, ">")
        if offset + size > len(buf) or size < 4:
            raise TruncatedLoadCommands("fat arch entry out of range")
        inner = buf[offset : offset + size]
        magic = struct.unpack_from("<I", inner, 0)[0]
        if magic in (MH_MAGIC_64, MH_CIGAM_64):
            return inner
        if first_slice is None:
            first_slice = inner
    if first_slice is None:
        raise BadMagic("fat binary with no architectures")
    return first_slice


def _scan_strings(payload: bytes) -> set[str]:
    names = set()
    for raw in payload.split(b"\x00"):
        if raw:
            names.add(raw.decode("utf-8", errors="replace"))
    return names


def extract_macho_class_names(buf: bytes) -> set[str] | Encrypted:
    """Return class names from ``__objc_classname``, or ENCRYPTED."""
    if len(buf) < 4:
        raise BadMagic("buffer too small for a Mach-O header")
    if struct.unpack_from(">I", buf, 0)[0] == FAT_MAGIC:
        buf = _select_fat_slice(buf)

    magic_le = struct.unpack_from("<I", buf, 0)[0]
    if magic_le in (MH_MAGIC_64, MH_CIGAM_64):
        endian = "<" if magic_le == MH_MAGIC_64 else ">"
        header_size, is64 = 32, True
    elif magic_le in (MH_MAGIC_32, MH_CIGAM_32):
        endian = "<" if magic_le == MH_MAGIC_32 else ">"
        header_size, is64 = 28, False
    else:
        raise BadMagic(f"not a Mach-O header: 0x{magic_le:08x}")
    if len(buf) < header_size:
        raise TruncatedLoadCommands("buffer smaller than mach header")

    ncmds = _u4(buf, 16, endian)
    sizeofcmds = _u4(buf, 20, endian)
    cmds_end = header_size + sizeofcmds
    if ncmds > 4096 or cmds_end > len(buf):
        raise TruncatedLoadCommands("load commands exceed buffer")

    names: set[str] = set()
    encrypted = False
    off = header_size
    for _ in range(ncmds):
        if off + 8 > cmds_end:
            raise TruncatedLoadCommands(f"load command at {off:#x} past declared end")
        cmd = _u4(buf, off, endian)
        cmdsize = _u4(buf, off + 4, endian)
        if cmdsize < 8 or off + cmdsize > cmds_end:
            raise TruncatedLoadCommands(f"load command size {cmdsize} at {off:#x}")
        if cmd in (LC_ENCRYPTION_INFO, LC_ENCRYPTION_INFO_64):
            if _u4(buf, off + 16, endian) != 0:
                encrypted = True
        elif cmd == LC_SEGMENT_64 and is64:
            names |= _segment_sections(buf, off, cmdsize, endian, sect_size=80, name_off=72)
        elif cmd == LC_SEGMENT and not is64:
            names |= _segment_sections(buf, off, cmdsize, endian, sect_size=68, name_off=56)
        off += cmdsize

    if encrypted:
        return ENCRYPTED
    return names


def _segment_sections(
    buf: bytes, off: int, cmdsize: int, endian: str, *, sect_size: int, name_off: int
) -> set[str]:
    nsects = _u4(buf, off + name_off - 8, endian)
    sects_off = off + name_off
    if sects_off + nsects * sect_size > off + cmdsize:
        raise TruncatedLoadCommands("sections exceed segment command")
    names: set[str] = set()
    for i in range(nsects):
        s = sects_off + i * sect_size
        sectname = buf[s : s + 16].rstrip(b"\x00")
        if sectname != CLASSNAME_SECTION:
            continue
        if sect_size == 80:
            size = struct.unpack_from(endian + "Q", buf, s + 40)[0]
            data_off = _u4(buf, s + 48, endian)
        else:
            size = _u4(buf, s + 36, endian)
            data_off = _u4(buf, s + 40, endian)
        if data_off + size > len(buf):
            raise TruncatedLoadCommands("classname section data out of range")
        names |= _scan_strings(buf[data_off : data_off + size])
    return names
