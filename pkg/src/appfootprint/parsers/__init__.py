"""Container handling for APK/IPA archives and class-dump sidecars."""

from __future__ import annotations

import io
import posixpath
import re
import zipfile

from ..model import AppPackage, ManifestData, Platform
from . import axml, bplist, dex, macho
from .axml import parse_android_manifest
from .bplist import parse_plist
from .dex import extract_dex_class_names
from .macho import ENCRYPTED, Encrypted, extract_macho_class_names

__all__ = [
    "ArchiveError",
    "NotAnArchive",
    "UnrecognizedLayout",
    "ENCRYPTED",
    "Encrypted",
    "axml",
    "bplist",
    "dex",
    "macho",
    "extract_dex_class_names",
    "extract_macho_class_names",
    "ingest_class_dump",
    "open_app_archive",
    "parse_android_manifest",
    "parse_plist",
]

_DEX_NAME = re.compile(r"^classes\d*\.dex$")
_INFO_PLIST = re.compile(r"^Payload/[^/]+\.app/Info\.plist$")


class ArchiveError(Exception):
    """Base class for app container failures."""


class NotAnArchive(ArchiveError):
    pass


class UnrecognizedLayout(ArchiveError):
    pass


def ingest_class_dump(text: str) -> set[str]:
    """Read an externally produced class dump: one name per line, "#" comments."""
    names = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.add(line)
    return names


def open_app_archive(data: bytes, hint: Platform | None = None) -> AppPackage:
    """Open an APK or IPA and extract class names plus manifest data.

    The platform is detected from the archive layout: ``classes.dex`` at the
    root means APK, ``Payload/*.app/Info.plist`` means IPA. ``hint`` breaks
    the tie should an archive carry both markers.
    """
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise NotAnArchive(f"not a ZIP archive: {exc}") from exc

    with archive:
        names = archive.namelist()
        has_dex = any(_DEX_NAME.match(n) for n in names)
        plist_paths = [n for n in names if _INFO_PLIST.match(n)]

        if has_dex and plist_paths:
            platform = hint or Platform.ANDROID
        elif has_dex:
            platform = Platform.ANDROID
        elif plist_paths:
            platform = Platform.IOS
        else:
            raise UnrecognizedLayout(
                "archive has neither classes.dex nor Payload/*.app/Info.plist"
            )

        if platform is Platform.ANDROID:
            return _open_apk(archive, names)
        return _open_ipa(archive, plist_paths[0])


def _open_apk(archive: zipfile.ZipFile, names: list[str]) -> AppPackage:
    class_names: set[str] = set()
    for name in sorted(n for n in names if _DEX_NAME.match(n)):
        class_names |= extract_dex_class_names(archive.read(name))

    manifest = ManifestData()
    if "AndroidManifest.xml" in names:
        manifest = parse_android_manifest(archive.read("AndroidManifest.xml"))

    return AppPackage(
        app_id=manifest.package_name,
        platform=Platform.ANDROID,
        class_names=class_names,
        manifest=manifest,
    )


def _open_ipa(archive: zipfile.ZipFile, plist_path: str) -> AppPackage:
    manifest = parse_plist(archive.read(plist_path))
    app_dir = posixpath.dirname(plist_path)

    executable = manifest.metadata.get("CFBundleExecutable")
    if not executable:
        executable = posixpath.basename(app_dir)[: -len(".app")]
    binary_path = f"{app_dir}/{executable}"

    class_names: set[str] = set()
    encrypted = False
    if binary_path in archive.namelist():
        extracted = extract_macho_class_names(archive.read(binary_path))
        if isinstance(extracted, Encrypted):
            encrypted = True
        else:
            class_names = extracted

    return AppPackage(
        app_id=manifest.package_name,
        platform=Platform.IOS,
        class_names=class_names,
        manifest=manifest,
        encrypted=encrypted,
    )
