from __future__ import annotations

import pytest

from appfootprint.parsers import axml
from conftest import mutate
from oracles import build_axml, build_text_manifest

PKG = "com.example.app"
PERMS = ["android.permission.INTERNET", "android.permission.CAMERA"]
META = {"com.facebook.sdk.AutoInitEnabled": False, "com.example.api_key": "k-123"}


def test_binary_fixture_round_trip():
    manifest = axml.parse_android_manifest(build_axml(PKG, PERMS, META))
    assert manifest.package_name == PKG
    assert manifest.permissions == set(PERMS)
    assert manifest.metadata["com.facebook.sdk.AutoInitEnabled"] == "false"
    assert manifest.metadata["com.example.api_key"] == "k-123"


def test_text_variant_matches_binary():
    binary = axml.parse_android_manifest(build_axml(PKG, PERMS, META))
    text = axml.parse_android_manifest(build_text_manifest(PKG, PERMS, META))
    assert binary == text


def test_no_permissions():
    manifest = axml.parse_android_manifest(build_axml(PKG, [], {}))
    assert manifest.permissions == set()
    assert manifest.metadata == {}


def test_sdk23_permissions_merged():
    text = (
        f'<manifest xmlns:android="{axml.ANDROID_NS}" package="p">'
        '<uses-permission-sdk-23 android:name="android.permission.CAMERA"/>'
        "</manifest>"
    ).encode()
    assert axml.parse_android_manifest(text).permissions == {"android.permission.CAMERA"}


def test_integer_metadata_rendered_as_string():
    manifest = axml.parse_android_manifest(build_axml(PKG, [], {"level": 7}))
    assert manifest.metadata["level"] == "7"


def test_not_xml():
    with pytest.raises(axml.NotXml):
        axml.parse_android_manifest(b"\x99\x99 definitely not xml")


def test_truncated_chunk_rejected():
    blob = bytearray(build_axml(PKG, PERMS, META))
    with pytest.raises(axml.AxmlError):
        axml.parse_android_manifest(bytes(blob[:40]))


def test_fuzzed_buffers_never_crash(rng):
    base = build_axml(PKG, PERMS, META)
    for _ in range(2000):
        blob = mutate(rng, base)
        try:
            result = axml.parse_android_manifest(blob)
        except axml.AxmlError:
            continue
        assert result.permissions is not None
