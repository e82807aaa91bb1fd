"""Shared domain types: platforms, app packages, manifest data."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Platform(str, Enum):
    ANDROID = "android"
    IOS = "ios"


class Category(str, Enum):
    GENERAL = "general"
    CHILDREN = "children"


@dataclass
class ManifestData:
    """Permissions and key/value configuration from a manifest or Info.plist.

    Permission identifiers are trimmed and nonempty. Metadata values are
    string-rendered scalars (booleans as "true"/"false"); Android resource
    references that could not be resolved are kept as raw "@0x..." strings.
    """

    permissions: set[str] = field(default_factory=set)
    metadata: dict[str, str] = field(default_factory=dict)
    package_name: str = ""


@dataclass
class AppPackage:
    """A parsed app container: dotted class names plus manifest data.

    ``class_names`` never contains type descriptors (no leading "L", no "/"),
    only dotted names; inner classes keep their "$" segments verbatim.
    ``encrypted`` is set for iOS binaries protected by FairPlay, in which case
    ``class_names`` stays empty until a class-dump sidecar is ingested.
    """

    app_id: str
    platform: Platform
    class_names: set[str] = field(default_factory=set)
    manifest: ManifestData = field(default_factory=ManifestData)
    category: Category = Category.GENERAL
    title: str = ""
    encrypted: bool = False
