"""Tracker-company ownership graph: parent chains, countries, owned domains."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

_COUNTRY = re.compile(r"^[A-Z]{2}$")


class CompanyError(Exception):
    """Base class for company database failures."""


class SchemaError(CompanyError):
    pass


class UnknownParent(CompanyError):
    pass


class CycleDetected(CompanyError):
    pass


class DuplicateDomain(CompanyError):
    pass


class UnknownCompany(CompanyError):
    pass


@dataclass(frozen=True)
class Company:
    company_id: str
    display_name: str
    parent_id: str | None
    country: str
    domains: tuple[str, ...]


class TrackingDomainDB:
    """Registrable-domain index; longest domain suffix wins on lookup."""

    def __init__(self, domain_to_company: dict[str, str]):
        self._domains = dict(domain_to_company)

    def __len__(self) -> int:
        return len(self._domains)

    def items(self):
        return self._domains.items()

    def lookup(self, host: str) -> str | None:
        """Company owning ``host``: exact domain match or dot-suffix match."""
        labels = host.lower().rstrip(".").split(".")
        for start in range(len(labels)):
            candidate = ".".join(labels[start:])
            if candidate in self._domains:
                return self._domains[candidate]
        return None


class CompanyGraph:
    def __init__(self, companies: list[Company]):
        self.companies: dict[str, Company] = {}
        for company in companies:
            if company.company_id in self.companies:
                raise SchemaError(f"duplicate company_id {company.company_id!r}")
            self.companies[company.company_id] = company

        for company in companies:
            if company.parent_id is not None and company.parent_id not in self.companies:
                raise UnknownParent(
                    f"{company.company_id} names unknown parent {company.parent_id!r}"
                )
        self._check_acyclic()

        domains: dict[str, str] = {}
        for company in companies:
            for domain in company.domains:
                if domain in domains:
                    raise DuplicateDomain(
                        f"{domain} owned by both {domains[domain]} and {company.company_id}"
                    )
                domains[domain] = company.company_id
        self.domain_db = TrackingDomainDB(domains)

    def _check_acyclic(self) -> None:
        for start in self.companies:
            seen = {start}
            current = self.companies[start].parent_id
            while current is not None:
                if current in seen:
                    raise CycleDetected(f"ownership cycle through {current!r}")
                seen.add(current)
                current = self.companies[current].parent_id

    def __contains__(self, company_id: str) -> bool:
        return company_id in self.companies

    def __len__(self) -> int:
        return len(self.companies)

    def get(self, company_id: str) -> Company:
        try:
            return self.companies[company_id]
        except KeyError:
            raise UnknownCompany(company_id) from None

    def chain(self, company_id: str) -> list[Company]:
        """The ownership chain from the company up to its root parent."""
        out = [self.get(company_id)]
        while out[-1].parent_id is not None:
            out.append(self.companies[out[-1].parent_id])
        return out

    def resolve_root(self, company_id: str) -> Company:
        """Follow the parent chain to the parentless ancestor."""
        return self.chain(company_id)[-1]

    def company_for_host(self, host: str) -> tuple[str, str] | None:
        """(owning company, root company) for a host, if it is a known domain."""
        owner = self.domain_db.lookup(host)
        if owner is None:
            return None
        return owner, self.resolve_root(owner).company_id

    def jurisdictions(self, ids: set[str], include_chain: bool = False) -> set[str]:
        """Countries of the given companies; with chains, of every ancestor too."""
        countries = set()
        for company_id in ids:
            if include_chain:
                countries.update(c.country for c in self.chain(company_id))
            else:
                countries.add(self.get(company_id).country)
        return countries


def load_company_db(document: str | bytes) -> CompanyGraph:
    """Load and validate the JSON company database."""
    try:
        entries = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"company db is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise SchemaError("company db must be a JSON array")

    companies = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise SchemaError("company entries must be objects")
        try:
            company_id = entry["company_id"]
            display_name = entry["display_name"]
            parent_id = entry["parent_id"]
            country = entry["country"]
            domains = entry["domains"]
        except KeyError as exc:
            raise SchemaError(f"company entry missing field {exc}") from exc
        if not company_id or not isinstance(company_id, str):
            raise SchemaError("company_id must be a nonempty string")
        if parent_id == company_id:
            raise CycleDetected(f"{company_id} is its own parent")
        if not isinstance(country, str) or not _COUNTRY.match(country):
            raise SchemaError(f"{company_id}: country {country!r} is not ISO alpha-2")
        normalized = tuple(d.lower().lstrip(".") for d in domains)
        if any(not d for d in normalized):
            raise SchemaError(f"{company_id}: empty domain")
        companies.append(
            Company(
                company_id=company_id,
                display_name=display_name,
                parent_id=parent_id,
                country=country,
                domains=normalized,
            )
        )
    return CompanyGraph(companies)
