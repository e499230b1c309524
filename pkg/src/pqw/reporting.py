"""
reporting.py – report documents for every CLI command.

A report is a plain dict, serialised with sorted keys so identical input
and limits give byte-identical JSON once timing is switched off.  Values
the tool did not compute itself carry status "cited"; values it could not
decide carry status "uncertified" or "undetermined".
"""

from __future__ import annotations

import json
import logging
import os
from functools import lru_cache

import jsonschema

from product_quotient import Census, KodairaReport, ProductQuotientSpec, betti_b1, h1_theta
from settings import REPO_ROOT, Limits

log = logging.getLogger("pqw.report")

REPORT_SCHEMA = os.path.join(REPO_ROOT, "schema", "report-v1.json")
SCHEMA_ID = "pqw-report-v1"

PASS, FAIL, OK, UNDETERMINED = "PASS", "FAIL", "OK", "UNDETERMINED"


@lru_cache(maxsize=None)
def _schema() -> dict:
    with open(REPORT_SCHEMA) as f:
        return json.load(f)


# ── Blocks ────────────────────────────────────────────────────────────────────

def census_block(spec: ProductQuotientSpec, census: Census) -> dict:
    g = spec.group
    return {
        "fixed_tuples": census.fixed_tuples,
        "singular_points": census.singular_points,
        "by_type": census.by_type(),
        "records": [
            {
                "points": [p.describe(g) for p in r.points],
                "stabilizer": sorted(g.label(x) for x in r.stabilizer),
                "orbit_size": r.orbit_size,
                "type": r.type_tag,
            }
            for r in census.records
        ],
    }


def invariants_block(spec: ProductQuotientSpec, census: Census, kodaira: KodairaReport) -> dict:
    return {
        "status": "computed",
        "genera": list(spec.genera),
        "h1_theta": h1_theta(spec),
        "b1": betti_b1(spec),
        "census": census_block(spec, census),
        "kodaira": kodaira.as_dict(),
        "resolution": {
            "value": "same h1(Theta) and pi1 as the quotient",
            "status": "cited",
            "note": "singularities of type 1/2(1,...,1) are resolved by one blow-up each",
        },
    }


def check(name: str, expected, actual, undetermined: bool = False) -> dict:
    """undetermined marks a value a limit kept us from computing; it neither passes nor fails."""
    if undetermined:
        return {"name": name, "expected": expected, "actual": None, "passed": False, "undetermined": True}
    passed = expected == actual
    if not passed:
        log.warning(f"check {name}: expected {expected!r}, got {actual!r}")
    return {"name": name, "expected": expected, "actual": actual, "passed": passed}


def verdict(checks: list[dict], undetermined: bool = False) -> str:
    if any(not c["passed"] for c in checks if not c.get("undetermined")):
        return FAIL
    if undetermined:
        return UNDETERMINED
    return PASS if checks else OK


# ── Documents ─────────────────────────────────────────────────────────────────

def _strip_timing(value):
    if isinstance(value, dict):
        return {k: _strip_timing(v) for k, v in value.items() if k != "timing"}
    if isinstance(value, list):
        return [_strip_timing(v) for v in value]
    return value


def build_report(command: str, limits: Limits, *, verdict: str, timing: dict | None = None,
                 **blocks) -> dict:
    report = {"schema": SCHEMA_ID, "command": command, "verdict": verdict, "limits": limits.as_dict()}
    report.update({k: v for k, v in blocks.items() if v is not None})
    if timing is not None:
        report["timing"] = {k: round(v, 3) for k, v in timing.items()}
    else:
        report = _strip_timing(report)
    return report


def validate_report(report: dict) -> None:
    """Raise jsonschema.ValidationError unless the report matches the published schema."""
    jsonschema.validate(instance=report, schema=_schema())


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write(report: dict, path: str) -> None:
    """'-' writes to stdout."""
    text = dumps(report)
    if path == "-":
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    log.info(f"report written to {path}")


# ── Text rendering ────────────────────────────────────────────────────────────

def _tagged(value) -> str:
    if isinstance(value, dict) and "status" in value:
        return f"{value.get('value')} [{value['status']}]"
    return str(value)


def render_text(report: dict) -> str:
    lines = [f"pqw {report['command']}: {report['verdict']}"]
    if report.get("message"):
        lines.append(f"  {report['message']}")
    if "spec" in report:
        s = report["spec"]
        lines.append(f"  spec       {s.get('label') or '(unlabelled)'}, n = {s['n']}")
    inv = report.get("invariants")
    if inv:
        c = inv["census"]
        lines += [
            f"  genera     {', '.join(str(g) for g in inv['genera'])}",
            f"  h1(Theta)  {inv['h1_theta']}",
            f"  b1         {inv['b1']}",
            f"  singular   {c['singular_points']} {c['by_type']}",
            f"  terminal   {_tagged(inv['kodaira']['terminal'])}",
            f"  kappa      {_tagged(inv['kodaira']['kappa'])}",
        ]
    pi1 = report.get("pi1")
    if pi1:
        order = pi1["order"] if pi1["order"] is not None else "?"
        lines.append(f"  pi1        {pi1['isomorphism_type']} (order {order}, {pi1['status']})")
        if pi1.get("reason"):
            lines.append(f"             {pi1['reason']}")
        if pi1.get("beyond_verified_range"):
            lines.append("             beyond the verified range n <= 5")
    uc = report.get("universal_cover")
    if uc:
        lines.append(f"  univ.cover {uc['singular_points']} singular points "
                     f"({uc['pi1_order']} x {uc['base_singular_points']})")
    cover = report.get("cover")
    if cover:
        lines.append(f"  cover      degree {cover['degree']}, "
                     f"{'unramified' if cover['unramified'] else 'ramified by ' + ', '.join(cover['ramifying_elements'])}")
        if cover["cover_singular_points"] is not None:
            lines.append(f"             singular points {cover['base_singular_points']} -> "
                         f"{cover['cover_singular_points']}")
        if cover.get("note"):
            lines.append(f"             {cover['note']}")
    fermat = report.get("fermat")
    if fermat:
        lines.append(f"  marked     {len(fermat['marked_points'])} points, orbits {fermat['orbit_lengths']}")
        if "subgroup_orbit_lengths" in fermat:
            lines.append(f"  H-orbits   {fermat['subgroup_orbit_lengths']}")
        for c in fermat["checks"]:
            lines.append(f"  [{'PASS' if c['passed'] else 'FAIL'}] {c['name']}" +
                         (f" ({c['detail']})" if c["detail"] else ""))
    for c in report.get("checks", []):
        lines.append(f"  [{'PASS' if c['passed'] else '????' if c.get('undetermined') else 'FAIL'}] {c['name']}: "
                     f"expected {c['expected']}, got {c['actual']}")
    if "timing" in report:
        lines.append("  timing     " + ", ".join(f"{k} {v:.2f}s" for k, v in report["timing"].items()))
    return "\n".join(lines) + "\n"
