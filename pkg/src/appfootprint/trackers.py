"""Tracking-library signature matching, AdId detection, SDK config flags."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

from .model import ManifestData, Platform

PURPOSES = {"advertising", "analytics", "attribution", "crash-reporting", "social"}

ADID_ANDROID_SEGMENT = "IAdvertisingIdService"
ADID_IOS_CLASSES = ("AdSupport", "ASIdentifierManager")


class SignatureError(Exception):
    """Base class for signature database failures."""


class SchemaError(SignatureError):
    pass


class DuplicateLibraryId(SignatureError):
    pass


class EmptyPrefix(SignatureError):
    pass


class EmptyCorpus(SignatureError):
    pass


class FlagState(str, Enum):
    ENABLED = "enabled"
    DISABLED = "disabled"
    UNSET = "unset"


@dataclass(frozen=True)
class ConfigFlag:
    name: str
    android_key: str | None
    ios_key: str | None


@dataclass
class TrackerLibrary:
    library_id: str
    display_name: str
    company_id: str
    purposes: frozenset[str]
    prefixes: dict[Platform, tuple[str, ...]]
    config_flags: tuple[ConfigFlag, ...] = ()


@dataclass
class SdkConfigReport:
    """Per-library privacy flag states; flags of undetected libraries stay unset."""

    flags: dict[str, dict[str, FlagState]] = field(default_factory=dict)


def _drop_nested_prefixes(prefixes: list[str]) -> tuple[str, ...]:
    """Remove prefixes that extend another prefix of the same library."""
    kept: list[str] = []
    for p in sorted(set(prefixes), key=len):
        if not any(p.startswith(shorter) for shorter in kept):
            kept.append(p)
    return tuple(sorted(kept))


class SignatureDB:
    """Immutable, prefix-normalized tracking-library signature database."""

    def __init__(self, libraries: list[TrackerLibrary]):
        self.libraries: dict[str, TrackerLibrary] = {}
        for lib in libraries:
            if lib.library_id in self.libraries:
                raise DuplicateLibraryId(lib.library_id)
            self.libraries[lib.library_id] = lib
        self._by_platform: dict[Platform, list[tuple[str, str]]] = defaultdict(list)
        for lib in libraries:
            for platform, prefixes in lib.prefixes.items():
                for prefix in prefixes:
                    self._by_platform[platform].append((prefix, lib.library_id))

    def __contains__(self, library_id: str) -> bool:
        return library_id in self.libraries

    def __len__(self) -> int:
        return len(self.libraries)

    def get(self, library_id: str) -> TrackerLibrary:
        return self.libraries[library_id]

    def company_of(self, library_id: str) -> str:
        return self.libraries[library_id].company_id

    def prefixes_for(self, platform: Platform) -> list[tuple[str, str]]:
        return self._by_platform.get(platform, [])

    def match_trackers(self, class_names: set[str], platform: Platform) -> set[str]:
        """Library ids whose platform prefixes match any class name."""
        pairs = self.prefixes_for(platform)
        matched = set()
        for name in class_names:
            for prefix, library_id in pairs:
                if library_id not in matched and name.startswith(prefix):
                    matched.add(library_id)
        return matched

    def evaluate_sdk_config(
        self, manifest: ManifestData, detected: set[str], platform: Platform
    ) -> SdkConfigReport:
        """Report data-minimisation flag states for detected libraries."""
        report = SdkConfigReport()
        for lib in self.libraries.values():
            if not lib.config_flags:
                continue
            states = {}
            for flag in lib.config_flags:
                key = flag.android_key if platform is Platform.ANDROID else flag.ios_key
                state = FlagState.UNSET
                if lib.library_id in detected and key is not None:
                    state = _flag_state(manifest.metadata.get(key))
                states[flag.name] = state
            report.flags[lib.library_id] = states
        return report

    def mine_candidate_signatures(
        self,
        corpus: list[tuple[str, set[str]]],
        platform: Platform,
        threshold: float = 0.01,
    ) -> list[tuple[str, float]]:
        """Class-name prefixes reaching the prevalence threshold, for labeling.

        Android prefixes are the first two dot-segments; iOS prefixes the first
        dot-segment (the whole name for flat Objective-C namespaces). Prefixes
        already covered by the database are excluded. The output ranks human
        labeling work; nothing is auto-added.
        """
        if not corpus:
            raise EmptyCorpus("cannot mine an empty corpus")
        if not 0 < threshold <= 1:
            raise ValueError(f"threshold {threshold} outside (0, 1]")

        counts: dict[str, int] = defaultdict(int)
        for _, class_names in corpus:
            prefixes = {_mined_prefix(n, platform) for n in class_names}
            prefixes.discard(None)
            for prefix in prefixes:
                counts[prefix] += 1

        known = [p for p, _ in self.prefixes_for(platform)]
        results = []
        for prefix, count in counts.items():
            prevalence = count / len(corpus)
            if prevalence < threshold:
                continue
            probe = prefix + "." if platform is Platform.ANDROID else prefix
            if any(probe.startswith(k) for k in known):
                continue
            results.append((prefix, prevalence))
        results.sort(key=lambda item: (-item[1], item[0]))
        return results


def _mined_prefix(name: str, platform: Platform) -> str | None:
    segments = name.split(".")
    if platform is Platform.ANDROID:
        if len(segments) < 2:
            return None
        return ".".join(segments[:2])
    return segments[0] or None


def _flag_state(value: str | None) -> FlagState:
    if value is None:
        return FlagState.UNSET
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes"):
        return FlagState.ENABLED
    if lowered in ("false", "0", "no"):
        return FlagState.DISABLED
    return FlagState.UNSET  # unresolvable references and junk count as unset


def load_signature_db(document: str | bytes) -> SignatureDB:
    """Load and normalize the JSON signature database."""
    try:
        entries = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"signature db is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise SchemaError("signature db must be a JSON array")

    libraries = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise SchemaError("signature entries must be objects")
        try:
            library_id = entry["library_id"]
            display_name = entry["display_name"]
            company_id = entry["company_id"]
            purposes = entry["purposes"]
            android_prefixes = entry["android_prefixes"]
            ios_prefixes = entry["ios_prefixes"]
        except KeyError as exc:
            raise SchemaError(f"signature entry missing field {exc}") from exc
        if not library_id or not isinstance(library_id, str):
            raise SchemaError("library_id must be a nonempty string")
        bad_purposes = set(purposes) - PURPOSES
        if bad_purposes:
            raise SchemaError(f"{library_id}: unknown purposes {sorted(bad_purposes)}")
        if not android_prefixes and not ios_prefixes:
            raise EmptyPrefix(f"{library_id} declares no prefixes")
        for prefix in list(android_prefixes) + list(ios_prefixes):
            if not prefix or not isinstance(prefix, str):
                raise EmptyPrefix(f"{library_id} contains an empty prefix")

        prefixes = {}
        if android_prefixes:
            prefixes[Platform.ANDROID] = _drop_nested_prefixes(android_prefixes)
        if ios_prefixes:
            prefixes[Platform.IOS] = _drop_nested_prefixes(ios_prefixes)

        flags = tuple(
            ConfigFlag(
                name=f["name"],
                android_key=f.get("android_key"),
                ios_key=f.get("ios_key"),
            )
            for f in entry.get("config_flags", [])
        )
        libraries.append(
            TrackerLibrary(
                library_id=library_id,
                display_name=display_name,
                company_id=company_id,
                purposes=frozenset(purposes),
                prefixes=prefixes,
                config_flags=flags,
            )
        )
    return SignatureDB(libraries)


def detect_adid_access(class_names: set[str], platform: Platform) -> bool:
    """Whether the app code can reach the advertising identifier."""
    if platform is Platform.IOS:
        for name in class_names:
            if name in ADID_IOS_CLASSES or name.startswith("AdSupport."):
                return True
        return False
    for name in class_names:
        for segment in name.replace("$", ".").split("."):
            if segment == ADID_ANDROID_SEGMENT:
                return True
    return False


def obfuscation_suspected(class_names: set[str]) -> bool:
    """Heuristic: more than half of all dot-segments are single characters."""
    total = 0
    single = 0
    for name in class_names:
        for segment in name.split("."):
            total += 1
            if len(segment) == 1:
                single += 1
    return total > 0 and single / total > 0.5
