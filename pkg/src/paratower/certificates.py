"""Certificate envelopes: canonical JSON, content hashing, re-verification.

Every artifact is persisted as {schema_version, kind, payload, content_hash,
tool_version, seed}.  The hash covers the canonical payload bytes, so two
runs with identical inputs produce byte-identical files, and any tampering
is detected before the payload is re-checked.
"""

from __future__ import annotations

import hashlib
import json
from typing import Optional, Tuple

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"
KINDS = ("towers", "coloring", "comparison", "isometry", "witness")


class MalformedCertificate(ValueError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def wrap(kind: str, payload: dict, seed: Optional[int] = 0) -> dict:
    if kind not in KINDS:
        raise ValueError(f"unknown certificate kind: {kind!r}")
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "payload": payload,
        "content_hash": content_hash(payload),
        "tool_version": TOOL_VERSION,
        "seed": seed,
    }


def parse_envelope(data: dict) -> Tuple[str, dict]:
    """Validate envelope structure and the payload hash; return (kind, payload)."""
    if not isinstance(data, dict):
        raise MalformedCertificate("certificate must be a JSON object")
    for key in ("schema_version", "kind", "payload", "content_hash"):
        if key not in data:
            raise MalformedCertificate(f"missing field: {key}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise MalformedCertificate(f"unsupported schema: {data['schema_version']!r}")
    kind = data["kind"]
    if kind not in KINDS:
        raise MalformedCertificate(f"unknown kind: {kind!r}")
    if not isinstance(data["payload"], (dict, list)):
        raise MalformedCertificate("payload must be an object")
    return kind, data["payload"]


def hash_matches(data: dict) -> bool:
    return content_hash(data["payload"]) == data["content_hash"]


def _verify_towers(payload: dict) -> dict:
    from .towers import TowerFamily, verify_towers

    family = TowerFamily.from_json(payload)
    mode = payload.get("mode", "exact")
    radius = payload.get("radius")
    cert = verify_towers(family, mode, radius)
    recorded = payload.get("checks", {})
    consistent = all(
        recorded.get(name, {}).get("pass") == check["pass"]
        for name, check in cert.checks.items()
    )
    return {
        "pass": cert.passed and consistent,
        "recomputed": cert.checks,
        "consistent_with_recorded": consistent,
    }


def _verify_coloring(payload: dict) -> dict:
    from .coloring import greedy_color

    k_desc = payload["K"]
    group = "Z" if k_desc == "Z" else None
    if group is None:
        from .groups import finite_group_from_json

        group = finite_group_from_json(k_desc)
    coloring = greedy_color(group, payload["E"])
    window = payload["window"]
    proper = coloring.is_proper_on(window)
    same = [coloring.color_of(k) for k in window] == payload["assignment"]
    within = all(1 <= c <= payload["m"] for c in payload["assignment"])
    return {
        "pass": proper and same and within,
        "proper": proper,
        "assignment_matches": same,
        "within_budget": within,
    }


def _verify_witness_payload(payload: dict) -> dict:
    from .comparison import SubeqWitness, verify_witness

    w = SubeqWitness.from_json(payload)
    report = verify_witness(w)
    return {"pass": report["pass"], "report": report}


def _verify_comparison(payload: dict) -> dict:
    from .comparison import SubeqWitness, verify_witness

    names = ["claim2_witness", "claim3_witness"]
    reports = {}
    ok = True
    for name in names:
        report = verify_witness(SubeqWitness.from_json(payload[name]))
        reports[name] = report["pass"]
        ok = ok and report["pass"]
    for name in ("composed", "boosted"):
        report = verify_witness(SubeqWitness.from_json(payload[name]["witness"]))
        reports[name] = report["pass"]
        ok = ok and report["pass"]
    flags = [
        payload.get("claim1", {}).get("pass"),
        payload.get("claim2", {}).get("pass"),
        payload.get("claim3", {}).get("pass"),
        payload.get("pass"),
    ]
    ok = ok and all(flags)
    return {"pass": ok, "witnesses": reports, "recorded_flags": flags}


def _verify_isometry(payload: dict) -> dict:
    from .boundary import clopen_from_json
    from .crossed import (
        CrossedElement,
        StepFunction,
        cp_adjoint,
        cp_multiply,
        expectation,
    )

    v = CrossedElement.from_json(payload["v"])
    isometry = cp_multiply(cp_adjoint(v), v).equals(CrossedElement.one())
    range_exp = expectation(cp_multiply(v, cp_adjoint(v)))
    recorded = StepFunction.from_json(payload["range_expectation"])
    matches = range_exp.equals(recorded)
    v_union = None
    for s in payload["V"]:
        c = clopen_from_json(s)
        v_union = c if v_union is None else v_union.union(c)
    inside = range_exp.support().is_subset(v_union)
    not_unitary = not range_exp.equals(StepFunction.one())
    checks_ok = all(payload.get("checks", {}).values()) and payload.get("pass")
    ok = isometry and matches and inside and not_unitary and bool(checks_ok)
    return {
        "pass": ok,
        "isometry": isometry,
        "expectation_matches": matches,
        "range_inside_v": inside,
        "not_unitary": not_unitary,
    }


def verify_certificate(data: dict) -> Tuple[int, dict]:
    """Re-check a certificate; returns (exit code, report).

    0 on pass, 2 on any failed check or hash mismatch, 3 on malformed input.
    """
    try:
        kind, payload = parse_envelope(data)
    except MalformedCertificate as e:
        return 3, {"pass": False, "error": str(e)}
    if not hash_matches(data):
        return 2, {"pass": False, "error": "content hash mismatch"}
    try:
        if kind == "towers":
            report = _verify_towers(payload)
        elif kind == "coloring":
            report = _verify_coloring(payload)
        elif kind == "witness":
            report = _verify_witness_payload(payload)
        elif kind == "comparison":
            report = _verify_comparison(payload)
        else:
            report = _verify_isometry(payload)
    except (KeyError, TypeError, ValueError) as e:
        return 3, {"pass": False, "error": f"payload does not parse: {e}"}
    return (0 if report["pass"] else 2), report
