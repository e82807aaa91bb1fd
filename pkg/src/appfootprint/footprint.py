"""Per-app privacy footprints: the joined result of all analyzers."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .companies import CompanyGraph, load_company_db
from .model import AppPackage, Category, Platform
from .permissions import PermissionProfile, PermissionTable, load_permission_table
from .traffic import IdentifierKind, PiiMatch
from .trackers import SdkConfigReport, SignatureDB, load_signature_db, obfuscation_suspected


class FootprintError(Exception):
    pass


class InconsistentAppId(FootprintError):
    pass


@dataclass
class TrafficSummary:
    """Traffic-analysis results for one app, input to footprint assembly."""

    app_id: str = ""
    pii_matches: list[PiiMatch] = field(default_factory=list)
    hosts: set[str] = field(default_factory=set)
    tracking_hosts: dict[str, str] = field(default_factory=dict)


@dataclass
class PrivacyFootprint:
    app_id: str
    platform: Platform
    category: Category
    tracker_libraries: set[str]
    root_companies: set[str]
    permission_profile: PermissionProfile
    adid_static: bool
    adid_in_traffic: bool
    pii_matches: list[PiiMatch]
    hosts: set[str]
    tracking_hosts: dict[str, str]
    countries: set[str]
    sdk_config: SdkConfigReport
    obfuscation_suspected: bool


def build_footprint(
    pkg: AppPackage,
    trackers: set[str],
    adid_static: bool,
    sdk_config: SdkConfigReport,
    traffic: TrafficSummary | None,
    graph: CompanyGraph,
    signatures: SignatureDB,
    permission_table: PermissionTable,
) -> PrivacyFootprint:
    """Join analyzer outputs into one footprint record.

    Recipient companies are the union over detected libraries and contacted
    tracking hosts; countries cover each full ownership chain.
    """
    if traffic is None:
        traffic = TrafficSummary(app_id=pkg.app_id)
    elif traffic.app_id and pkg.app_id and traffic.app_id != pkg.app_id:
        raise InconsistentAppId(f"package {pkg.app_id!r} vs capture {traffic.app_id!r}")

    subsidiaries = {signatures.company_of(t) for t in trackers}
    subsidiaries.update(traffic.tracking_hosts.values())
    roots = {graph.resolve_root(c).company_id for c in subsidiaries}
    countries = graph.jurisdictions(subsidiaries | roots, include_chain=True)

    return PrivacyFootprint(
        app_id=pkg.app_id,
        platform=pkg.platform,
        category=pkg.category,
        tracker_libraries=set(trackers),
        root_companies=roots,
        permission_profile=permission_table.classify(pkg.manifest, pkg.platform),
        adid_static=adid_static,
        adid_in_traffic=any(
            m.identifier_kind is IdentifierKind.AD_ID for m in traffic.pii_matches
        ),
        pii_matches=sorted(traffic.pii_matches),
        hosts=set(traffic.hosts),
        tracking_hosts=dict(traffic.tracking_hosts),
        countries=countries,
        sdk_config=sdk_config,
        obfuscation_suspected=obfuscation_suspected(pkg.class_names),
    )


# -- bundled databases --------------------------------------------------------


def _bundled(name: str) -> bytes:
    return resources.files("appfootprint.data").joinpath(name).read_bytes()


def default_signature_db() -> SignatureDB:
    return load_signature_db(_bundled("signatures.json"))


def default_company_graph() -> CompanyGraph:
    return load_company_db(_bundled("companies.json"))


def default_permission_table() -> PermissionTable:
    return load_permission_table(_bundled("permissions.json"))
