"""HAR ingestion, PII needle construction, and traffic scanning."""

from __future__ import annotations

import hashlib
import json
import re
import urllib.parse
from dataclasses import dataclass, field
from enum import Enum

from .companies import TrackingDomainDB

_UUID = re.compile(r"^[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}$")
_MAC = re.compile(r"^([0-9a-fA-F]{2}:){5}[0-9a-fA-F]{2}$")


class TrafficError(Exception):
    """Base class for traffic analysis failures."""


class NotHar(TrafficError):
    pass


class ProfileError(TrafficError):
    pass


class IdentifierKind(str, Enum):
    AD_ID = "ad_id"
    ANDROID_ID = "android_id"
    SERIAL = "serial"
    IMEI = "imei"
    WIFI_MAC = "wifi_mac"
    PHONE_MODEL = "phone_model"
    PHONE_NAME = "phone_name"


class Transform(str, Enum):
    RAW = "raw"
    MD5 = "md5"
    SHA1 = "sha1"
    SHA256 = "sha256"
    URLENCODED = "urlencoded"


class Location(str, Enum):
    URL = "url"
    QUERY = "query"
    HEADER = "header"
    BODY = "body"


@dataclass(frozen=True)
class DeviceProfile:
    """Identifiers of the capture device, searched for in recorded traffic."""

    ad_id: str | None = None
    android_id: str | None = None
    serial: str | None = None
    imei: str | None = None
    wifi_mac: str | None = None
    phone_model: str | None = None
    phone_name: str | None = None

    def __post_init__(self):
        if self.ad_id is not None and not _UUID.match(self.ad_id):
            raise ProfileError(f"ad_id {self.ad_id!r} is not a UUID")
        if self.wifi_mac is not None and not _MAC.match(self.wifi_mac):
            raise ProfileError(f"wifi_mac {self.wifi_mac!r} is not colon-hex")

    @classmethod
    def from_json(cls, document: str | bytes) -> "DeviceProfile":
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"device profile is not valid JSON: {exc}") from exc
        known = {k.value for k in IdentifierKind}
        return cls(**{k: v for k, v in raw.items() if k in known})


@dataclass
class Transaction:
    url: str
    host: str
    method: str = "GET"
    headers: list[tuple[str, str]] = field(default_factory=list)
    query: list[tuple[str, str]] = field(default_factory=list)
    body_text: str = ""


@dataclass
class TrafficCapture:
    app_id: str
    transactions: list[Transaction] = field(default_factory=list)
    skipped_entries: int = 0


@dataclass(frozen=True, order=True)
class PiiMatch:
    identifier_kind: IdentifierKind
    transform: Transform
    host: str
    location: Location


def load_har(document: str | bytes, app_id: str = "") -> TrafficCapture:
    """Parse a HAR 1.2 document into a TrafficCapture.

    Entries without a usable request URL are skipped and counted in
    ``skipped_entries``.
    """
    try:
        har = json.loads(document)
    except json.JSONDecodeError as exc:
        raise NotHar(f"not valid JSON: {exc}") from exc
    log = har.get("log") if isinstance(har, dict) else None
    if not isinstance(log, dict) or "entries" not in log:
        raise NotHar("document has no log.entries")

    capture = TrafficCapture(app_id=app_id)
    for entry in log["entries"]:
        request = entry.get("request") if isinstance(entry, dict) else None
        url = request.get("url") if isinstance(request, dict) else None
        if not url:
            capture.skipped_entries += 1
            continue
        parsed = urllib.parse.urlsplit(url)
        host = (parsed.hostname or "").lower()
        if not host:
            capture.skipped_entries += 1
            continue
        body = ""
        post = request.get("postData")
        if isinstance(post, dict):
            body = post.get("text") or ""
        capture.transactions.append(
            Transaction(
                url=url,
                host=host,
                method=request.get("method", "GET"),
                headers=[(h.get("name", ""), h.get("value", "")) for h in request.get("headers", [])],
                query=[(q.get("name", ""), q.get("value", "")) for q in request.get("queryString", [])],
                body_text=body,
            )
        )
    return capture


class NeedleSet:
    """Case-insensitive search strings per (identifier kind, transform)."""

    def __init__(self, needles: dict[tuple[IdentifierKind, Transform], tuple[str, ...]]):
        self.needles = needles

    def __len__(self) -> int:
        return len(self.needles)

    def items(self):
        return self.needles.items()


def _digest(transform: Transform, text: str) -> str:
    algo = {Transform.MD5: hashlib.md5, Transform.SHA1: hashlib.sha1, Transform.SHA256: hashlib.sha256}
    return algo[transform](text.encode("utf-8")).hexdigest()


def build_needles(profile: DeviceProfile) -> NeedleSet:
    """All searched representations of every identifier present in the profile.

    Raw and URL-encoded forms use the canonical casing (ad_id and MAC
    lowercase, everything else verbatim); hashes are computed over the
    canonical form, plus the uppercase form for ad_id and MAC since SDKs
    differ in the casing they hash. Matching is case-insensitive throughout,
    so needles are stored lowercased.
    """
    canonical: dict[IdentifierKind, str] = {}
    hash_variants: dict[IdentifierKind, list[str]] = {}
    for kind in IdentifierKind:
        value = getattr(profile, kind.value)
        if value is None or value == "":
            continue
        if kind in (IdentifierKind.AD_ID, IdentifierKind.WIFI_MAC):
            canonical[kind] = value.lower()
            hash_variants[kind] = [value.lower(), value.upper()]
        else:
            canonical[kind] = value
            hash_variants[kind] = [value]

    needles: dict[tuple[IdentifierKind, Transform], tuple[str, ...]] = {}
    for kind, raw in canonical.items():
        needles[(kind, Transform.RAW)] = (raw.lower(),)
        needles[(kind, Transform.URLENCODED)] = (
            urllib.parse.quote(raw, safe="").lower(),
        )
        for transform in (Transform.MD5, Transform.SHA1, Transform.SHA256):
            digests = tuple(sorted({_digest(transform, v) for v in hash_variants[kind]}))
            needles[(kind, transform)] = digests
    return NeedleSet(needles)


def scan_capture(capture: TrafficCapture, needles: NeedleSet) -> list[PiiMatch]:
    """Every (identifier, transform, host, location) occurrence, deduplicated."""
    found: set[PiiMatch] = set()
    for tx in capture.transactions:
        haystacks = [
            (Location.URL, [tx.url]),
            (Location.QUERY, [v for _, v in tx.query]),
            (Location.HEADER, [v for _, v in tx.headers]),
            (Location.BODY, [tx.body_text]),
        ]
        for location, texts in haystacks:
            lowered = [t.lower() for t in texts if t]
            if not lowered:
                continue
            for (kind, transform), variants in needles.items():
                candidate = PiiMatch(kind, transform, tx.host, location)
                if candidate in found:
                    continue
                if any(v in text for v in variants for text in lowered):
                    found.add(candidate)
    return sorted(found)


def classify_hosts(
    capture: TrafficCapture, db: TrackingDomainDB
) -> tuple[set[str], dict[str, str]]:
    """All contacted hosts, and the tracking subset mapped to owning companies."""
    all_hosts = {tx.host for tx in capture.transactions}
    tracking = {}
    for host in all_hosts:
        company = db.lookup(host)
        if company is not None:
            tracking[host] = company
    return all_hosts, tracking
