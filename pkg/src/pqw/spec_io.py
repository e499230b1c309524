"""
spec_io.py – JSON specification documents.

A document names a group (abelian invariant factors or an explicit Cayley
table), one entry per factor with branch data text and generating-vector
labels, and optionally a subgroup and limit overrides:

    {
      "label": "X_3",
      "group": {"abelian": [4, 4]},
      "n": 3,
      "factors": [{"branch": "[0; 4,4,4]", "vector": ["(1,0)", "(0,1)", "(3,3)"]}, ...],
      "subgroup": ["(2,0)", "(0,2)"]
    }

Parse errors carry their line and column, schema errors a field path such
as factors[0].vector.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache

import jsonschema

from finite_group import DEFAULT_MAX_ORDER, FiniteGroup, GroupError, Subgroup, make_abelian_group, subgroup_generated
from orbifold import BranchData, BranchDataError, GeneratingVector
from product_quotient import Factor, ProductQuotientSpec
from settings import REPO_ROOT, limits_from_config

log = logging.getLogger("pqw.spec")

SPEC_SCHEMA = os.path.join(REPO_ROOT, "schema", "spec-v1.json")


class SpecFormatError(ValueError):
    """Malformed or schema-invalid specification document."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass(frozen=True, eq=False)
class SpecDocument:
    spec: ProductQuotientSpec
    subgroup: Subgroup | None = None
    limits: dict = field(default_factory=dict)
    source: str = "<string>"


@lru_cache(maxsize=None)
def _schema(path: str = SPEC_SCHEMA) -> dict:
    with open(path) as f:
        return json.load(f)


def field_path(parts) -> str:
    """['factors', 0, 'vector'] → 'factors[0].vector'"""
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "(document)"


def _check_schema(doc) -> None:
    validator = jsonschema.Draft7Validator(_schema())
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise SpecFormatError(error.message, field_path(error.absolute_path))


def _group(desc: dict, max_order: int) -> FiniteGroup:
    try:
        if "abelian" in desc:
            return make_abelian_group(desc["abelian"], max_order=max_order, name=desc.get("name"))
        return FiniteGroup(desc["cayley_table"], desc.get("labels"), name=desc.get("name", "G"),
                           max_order=max_order)
    except (GroupError, ValueError) as e:
        raise GroupError(f"group: {e}") from None


def _element_labels(group: FiniteGroup, labels, where: str) -> None:
    for i, lab in enumerate(labels):
        try:
            group.index_of(lab)
        except GroupError:
            raise SpecFormatError(f"unknown element label {lab!r} for {group.name}", f"{where}[{i}]") from None


def from_document(doc: dict, source: str = "<string>", max_group_order: int = DEFAULT_MAX_ORDER) -> SpecDocument:
    """Validate a parsed document and build its ProductQuotientSpec."""
    _check_schema(doc)
    group = _group(doc["group"], max_group_order)
    factors = []
    for i, f in enumerate(doc["factors"]):
        try:
            branch = BranchData.parse(f["branch"])
        except BranchDataError as e:
            raise SpecFormatError(str(e), f"factors[{i}].branch") from None
        _element_labels(group, f["vector"], f"factors[{i}].vector")
        factors.append(Factor(branch, GeneratingVector.from_labels(group, f["vector"]), f.get("label", "")))
    if "n" in doc and doc["n"] != len(factors):
        raise SpecFormatError(f"n = {doc['n']} but {len(factors)} factors are listed", "n")

    spec = ProductQuotientSpec(group, tuple(factors), doc.get("label", ""), {"source": source})
    subgroup = None
    if "subgroup" in doc:
        _element_labels(group, doc["subgroup"], "subgroup")
        subgroup = subgroup_generated(group, doc["subgroup"], name="H")
    limits = limits_from_config({"limits": doc.get("limits") or {}})
    log.debug(f"{source}: {spec.n} factors over {group.name}")
    return SpecDocument(spec, subgroup, limits, source)


def loads_spec(text: str, source: str = "<string>", max_group_order: int = DEFAULT_MAX_ORDER) -> SpecDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFormatError(e.msg, f"{source}:{e.lineno}:{e.colno}") from None
    return from_document(doc, source, max_group_order)


def load_spec(path: str, max_group_order: int = DEFAULT_MAX_ORDER) -> SpecDocument:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise SpecFormatError(f"cannot read specification: {e.strerror}", path) from None
    return loads_spec(text, path, max_group_order)


def to_document(spec: ProductQuotientSpec, subgroup: Subgroup | None = None) -> dict:
    g = spec.group
    if g.abelian_factors:
        group = {"abelian": list(g.abelian_factors)}
    else:
        group = {"cayley_table": g.table.tolist(), "labels": list(g.labels), "name": g.name}
    doc = {
        "version": 1,
        "group": group,
        "n": spec.n,
        "factors": [{"branch": str(f.branch), "vector": f.vector.labels()} for f in spec.factors],
    }
    if spec.label:
        doc["label"] = spec.label
    if subgroup is not None:
        doc["subgroup"] = subgroup.labels()
    return doc


def dumps_spec(spec: ProductQuotientSpec, subgroup: Subgroup | None = None) -> str:
    return json.dumps(to_document(spec, subgroup), indent=2) + "\n"
