"""Permission classification: dangerous sets and cross-platform groups."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .model import ManifestData, Platform

CROSS_PLATFORM_GROUPS = (
    "Bluetooth",
    "Calendar",
    "Camera",
    "Contacts",
    "Location",
    "Microphone",
    "Motion",
)

ANDROID_OS_PREFIX = "android.permission."


class PermissionTableError(Exception):
    pass


@dataclass
class PermissionProfile:
    raw: set[str] = field(default_factory=set)
    dangerous: set[str] = field(default_factory=set)
    cross_platform_groups: set[str] = field(default_factory=set)


class PermissionTable:
    """Dangerous-permission lists and the 7 cross-platform group mappings.

    Shipped as data so policy drift (new permissions, reclassification) is an
    update to the table, not to code.
    """

    def __init__(self, android_dangerous: set[str], ios_permissions: set[str],
                 groups: dict[str, dict[Platform, set[str]]]):
        self.android_dangerous = android_dangerous
        self.ios_permissions = ios_permissions
        self.groups = groups

    def classify(self, manifest: ManifestData, platform: Platform) -> PermissionProfile:
        """Split raw permissions into the dangerous subset and platform groups.

        Unknown permissions pass through ``raw`` unclassified. Every iOS
        usage-description key is opt-in by definition, so on iOS the
        dangerous set equals raw.
        """
        raw = set(manifest.permissions)
        if platform is Platform.ANDROID:
            dangerous = raw & self.android_dangerous
        else:
            dangerous = set(raw)
        groups = {
            group
            for group, members in self.groups.items()
            if raw & members.get(platform, set())
        }
        return PermissionProfile(raw=raw, dangerous=dangerous, cross_platform_groups=groups)

    def os_defined(self, raw: set[str], platform: Platform) -> set[str]:
        """Permissions defined by the OS vendor; custom permissions drop out.

        On Android these live in the android.permission namespace; on iOS the
        usage-description keys are OS-defined by construction.
        """
        if platform is Platform.ANDROID:
            return {p for p in raw if p.startswith(ANDROID_OS_PREFIX)}
        return set(raw)


def load_permission_table(document: str | bytes) -> PermissionTable:
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PermissionTableError(f"permission table is not valid JSON: {exc}") from exc
    try:
        android_dangerous = set(raw["android_dangerous"])
        ios_permissions = set(raw["ios_permissions"])
        group_spec = raw["cross_platform_groups"]
    except KeyError as exc:
        raise PermissionTableError(f"permission table missing section {exc}") from exc

    unknown = set(group_spec) - set(CROSS_PLATFORM_GROUPS)
    if unknown:
        raise PermissionTableError(f"unknown cross-platform groups {sorted(unknown)}")
    groups = {
        name: {
            Platform.ANDROID: set(members.get("android", [])),
            Platform.IOS: set(members.get("ios", [])),
        }
        for name, members in group_spec.items()
    }
    return PermissionTable(android_dangerous, ios_permissions, groups)


def classify_permissions(
    manifest: ManifestData, platform: Platform, table: PermissionTable
) -> PermissionProfile:
    return table.classify(manifest, platform)
