from __future__ import annotations

import json

import pytest

from appfootprint import companies
from appfootprint.footprint import default_company_graph


@pytest.fixture(scope="module")
def graph() -> companies.CompanyGraph:
    return default_company_graph()


def make_graph(entries) -> companies.CompanyGraph:
    return companies.load_company_db(json.dumps(entries))


def entry(cid, parent=None, country="US", domains=()):
    return {
        "company_id": cid,
        "display_name": cid.title(),
        "parent_id": parent,
        "country": country,
        "domains": list(domains),
    }


def test_verizon_chain_loads_and_resolves(graph):
    root = graph.resolve_root("aol")
    assert root.company_id == "verizon"
    assert root.country == "US"
    assert [c.company_id for c in graph.chain("aol")] == ["aol", "verizon-media", "verizon"]


def test_parentless_company_is_its_own_root(graph):
    assert graph.resolve_root("unity").company_id == "unity"


def test_unknown_company(graph):
    with pytest.raises(companies.UnknownCompany):
        graph.resolve_root("ghost")


def test_unknown_parent_rejected():
    with pytest.raises(companies.UnknownParent):
        make_graph([entry("a", parent="ghost")])


def test_cycle_rejected():
    with pytest.raises(companies.CycleDetected):
        make_graph([entry("a", parent="b"), entry("b", parent="a")])


def test_self_parent_rejected():
    with pytest.raises(companies.CycleDetected):
        make_graph([entry("a", parent="a")])


def test_duplicate_domain_rejected():
    with pytest.raises(companies.DuplicateDomain):
        make_graph([entry("a", domains=["x.com"]), entry("b", domains=["x.com"])])


def test_bad_country_rejected():
    with pytest.raises(companies.SchemaError):
        make_graph([entry("a", country="USA")])


def test_host_resolution_fig3_examples(graph):
    owner, root = graph.company_for_host("app-measurement.com")
    assert owner == "google" and root == "alphabet"
    owner, root = graph.company_for_host("googleads.g.doubleclick.net")
    assert owner == "google" and root == "alphabet"
    owner, root = graph.company_for_host("unityads.unity3d.com")
    assert root == "unity"
    assert graph.company_for_host("nonexistent.example") is None


def test_longest_suffix_wins():
    graph = make_graph(
        [entry("x", domains=["a.com"]), entry("y", domains=["b.a.com"])]
    )
    assert graph.domain_db.lookup("c.b.a.com") == "y"
    assert graph.domain_db.lookup("z.a.com") == "x"
    assert graph.domain_db.lookup("a.com") == "x"


def test_jurisdictions_with_chain(graph):
    assert graph.jurisdictions({"aol"}, include_chain=True) == {"US"}
    assert graph.jurisdictions(set()) == set()
    assert graph.jurisdictions({"yandex", "tencent"}) == {"RU", "CN"}


def test_adcolony_chain_spans_countries(graph):
    assert graph.jurisdictions({"adcolony"}, include_chain=True) == {"US", "NO"}


def test_resolve_root_idempotent_over_shipped_db(graph):
    for company_id in graph.companies:
        root = graph.resolve_root(company_id)
        assert graph.resolve_root(root.company_id) == root


def test_domain_index_bijection(graph):
    for company in graph.companies.values():
        for domain in company.domains:
            assert graph.domain_db.lookup(domain) == company.company_id


def test_display_name_change_does_not_affect_resolution(graph):
    renamed = [
        {
            "company_id": c.company_id,
            "display_name": c.display_name + " (renamed)",
            "parent_id": c.parent_id,
            "country": c.country,
            "domains": list(c.domains),
        }
        for c in graph.companies.values()
    ]
    other = make_graph(renamed)
    for company_id in graph.companies:
        assert (
            other.resolve_root(company_id).company_id
            == graph.resolve_root(company_id).company_id
        )


def test_signature_companies_all_resolve(graph):
    from appfootprint.footprint import default_signature_db

    for lib in default_signature_db().libraries.values():
        assert lib.company_id in graph, lib.library_id
