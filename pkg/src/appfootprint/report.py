"""Report serialization: footprints.json, summaries, CSV export."""

from __future__ import annotations

import csv
import datetime
import io
import json
import os

from .footprint import PrivacyFootprint
from .model import Category, Platform
from .permissions import PermissionProfile
from .stats import CountStats, GroupSummary
from .trackers import FlagState, SdkConfigReport
from .traffic import IdentifierKind, Location, PiiMatch, Transform

REPORT_VERSION = "footprint/1"

CSV_HEADER = [
    "app_id",
    "platform",
    "category",
    "tracker_libraries",
    "root_companies",
    "permissions",
    "dangerous_permissions",
    "permission_groups",
    "adid_static",
    "adid_in_traffic",
    "pii_matches",
    "hosts",
    "tracking_hosts",
    "countries",
    "obfuscation_suspected",
]


class ReportError(Exception):
    pass


class IoError(ReportError):
    pass


def _generated_at() -> str:
    """Report timestamp; SOURCE_DATE_EPOCH pins it for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.datetime.fromtimestamp(int(epoch), tz=datetime.timezone.utc)
    else:
        moment = datetime.datetime.now(tz=datetime.timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def footprint_to_dict(fp: PrivacyFootprint) -> dict:
    return {
        "app_id": fp.app_id,
        "platform": fp.platform.value,
        "category": fp.category.value,
        "tracker_libraries": sorted(fp.tracker_libraries),
        "root_companies": sorted(fp.root_companies),
        "permissions": {
            "raw": sorted(fp.permission_profile.raw),
            "dangerous": sorted(fp.permission_profile.dangerous),
            "cross_platform_groups": sorted(fp.permission_profile.cross_platform_groups),
        },
        "adid_static": fp.adid_static,
        "adid_in_traffic": fp.adid_in_traffic,
        "pii_matches": [
            {
                "identifier_kind": m.identifier_kind.value,
                "transform": m.transform.value,
                "host": m.host,
                "location": m.location.value,
            }
            for m in sorted(fp.pii_matches)
        ],
        "hosts": sorted(fp.hosts),
        "tracking_hosts": {h: fp.tracking_hosts[h] for h in sorted(fp.tracking_hosts)},
        "countries": sorted(fp.countries),
        "sdk_config": {
            lib: {flag: state.value for flag, state in sorted(states.items())}
            for lib, states in sorted(fp.sdk_config.flags.items())
        },
        "obfuscation_suspected": fp.obfuscation_suspected,
    }


def footprint_from_dict(raw: dict) -> PrivacyFootprint:
    perms = raw["permissions"]
    return PrivacyFootprint(
        app_id=raw["app_id"],
        platform=Platform(raw["platform"]),
        category=Category(raw["category"]),
        tracker_libraries=set(raw["tracker_libraries"]),
        root_companies=set(raw["root_companies"]),
        permission_profile=PermissionProfile(
            raw=set(perms["raw"]),
            dangerous=set(perms["dangerous"]),
            cross_platform_groups=set(perms["cross_platform_groups"]),
        ),
        adid_static=raw["adid_static"],
        adid_in_traffic=raw["adid_in_traffic"],
        pii_matches=[
            PiiMatch(
                identifier_kind=IdentifierKind(m["identifier_kind"]),
                transform=Transform(m["transform"]),
                host=m["host"],
                location=Location(m["location"]),
            )
            for m in raw["pii_matches"]
        ],
        hosts=set(raw["hosts"]),
        tracking_hosts=dict(raw["tracking_hosts"]),
        countries=set(raw["countries"]),
        sdk_config=SdkConfigReport(
            flags={
                lib: {flag: FlagState(state) for flag, state in states.items()}
                for lib, states in raw["sdk_config"].items()
            }
        ),
        obfuscation_suspected=raw["obfuscation_suspected"],
    )


def emit_report(footprints: list[PrivacyFootprint], fmt: str = "json") -> bytes:
    """Serialize footprints, sorted by app id for byte-stable output."""
    if not footprints:
        raise ReportError("no footprints to emit")
    ordered = sorted(footprints, key=lambda fp: (fp.platform.value, fp.app_id))
    if fmt == "json":
        doc = {
            "version": REPORT_VERSION,
            "generated_at": _generated_at(),
            "apps": [footprint_to_dict(fp) for fp in ordered],
        }
        return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
    if fmt == "csv":
        return _emit_csv(ordered)
    raise ReportError(f"unknown format {fmt!r}")


def _emit_csv(footprints: list[PrivacyFootprint]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for fp in footprints:
        writer.writerow(
            [
                fp.app_id,
                fp.platform.value,
                fp.category.value,
                ";".join(sorted(fp.tracker_libraries)),
                ";".join(sorted(fp.root_companies)),
                ";".join(sorted(fp.permission_profile.raw)),
                ";".join(sorted(fp.permission_profile.dangerous)),
                ";".join(sorted(fp.permission_profile.cross_platform_groups)),
                str(fp.adid_static).lower(),
                str(fp.adid_in_traffic).lower(),
                ";".join(
                    f"{m.identifier_kind.value}:{m.transform.value}:{m.host}:{m.location.value}"
                    for m in sorted(fp.pii_matches)
                ),
                ";".join(sorted(fp.hosts)),
                ";".join(f"{h}={fp.tracking_hosts[h]}" for h in sorted(fp.tracking_hosts)),
                ";".join(sorted(fp.countries)),
                str(fp.obfuscation_suspected).lower(),
            ]
        )
    return out.getvalue().encode("utf-8")


def load_footprints(data: bytes | str) -> list[PrivacyFootprint]:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ReportError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != REPORT_VERSION:
        raise ReportError(f"unsupported report version {doc.get('version')!r}")
    return [footprint_from_dict(raw) for raw in doc["apps"]]


# -- summaries ----------------------------------------------------------------


def summary_to_dict(summary: GroupSummary) -> dict:
    return {
        "group": summary.group,
        "platform": summary.platform.value,
        "total": summary.total,
        "mean_root_companies": summary.mean_root_companies,
        "mean_permissions": summary.mean_permissions,
        "mean_cross_platform_permissions": summary.mean_cross_platform_permissions,
        "location_share": summary.location_share,
        "adid_static_share": summary.adid_static_share,
        "adid_traffic_share": summary.adid_traffic_share,
    }


def emit_summaries(summaries: list[GroupSummary]) -> bytes:
    doc = {"groups": [summary_to_dict(s) for s in summaries]}
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


# -- human-readable tables -------------------------------------------------------


def format_comparison_table(summaries: list[GroupSummary]) -> str:
    """The comparative table: one column per (platform, group)."""
    columns = [(s.platform.value, s.group, s) for s in summaries]
    header = ["metric"] + [f"{p}/{g}" for p, g, _ in columns]
    rows = [
        ("total", lambda s: str(s.total)),
        ("root tracker companies (mean)", lambda s: f"{s.mean_root_companies:.2f}"),
        ("permissions (mean)", lambda s: f"{s.mean_permissions:.2f}"),
        ("cross-platform permissions (mean)", lambda s: f"{s.mean_cross_platform_permissions:.2f}"),
        ("location permission", lambda s: f"{s.location_share:.1%}"),
        ("adid access", lambda s: f"{s.adid_static_share:.1%}"),
        ("adid in traffic", lambda s: f"{s.adid_traffic_share:.1%}"),
    ]
    widths = [max(len(header[0]), max(len(r[0]) for r in rows))] + [
        max(10, len(h)) for h in header[1:]
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for label, getter in rows:
        cells = [label.ljust(widths[0])] + [
            getter(s).rjust(w) for (_, _, s), w in zip(columns, widths[1:])
        ]
        lines.append("  ".join(cells))
    return "\n".join(lines)


def format_count_table(title: str, cs: CountStats, top: list[tuple[str, float]], limit: int = 15) -> str:
    lines = [
        title,
        f"  median {cs.median:g}  mean {cs.mean:.1f}  Q1 {cs.q1:g}  Q3 {cs.q3:g}  "
        f">10 {cs.pct_gt:.2%}  none {cs.pct_none:.2%}  (n={cs.n})",
    ]
    for name, share in top[:limit]:
        lines.append(f"  {share:7.1%}  {name}")
    return "\n".join(lines)
