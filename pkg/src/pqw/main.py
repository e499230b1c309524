#!/usr/bin/env python3
"""
pqw – invariants and fundamental groups of product-quotient varieties.

    pqw validate     SPEC.json
    pqw invariants   SPEC.json
    pqw pi1          SPEC.json [--seed N]
    pqw cover        SPEC.json [--subgroup H | --subgroup "(2,0),(0,2)"]
    pqw paper        --family X|Y --n N [--skip-pi1]
    pqw fermat-verify [--subgroup H]

Common options: --limits max-cosets=K,..., --json PATH ('-' for stdout),
--no-timing, --config PATH, -v / -vv.

Exit codes: 0 success, 2 invalid input, 3 resource limit reached (result
undetermined), 4 failed check or internal error.
"""

import argparse
import logging
import sys
import time

import jsonschema

import families
import reporting
from fermat import verify_marked_points
from finite_group import FiniteGroup, GroupError, Subgroup, subgroup_generated
from fpgroup import BudgetError
from orbifold import BranchDataError, GeneratingVectorError, GenusError, UnsupportedError
from pi1 import UncertifiedError, armstrong_pi1, universal_cover_report
from product_quotient import (CensusBudgetError, CoverError, betti_b1, etale_intermediate_cover, h1_theta,
                              kodaira_report, singular_census)
from settings import SettingsError, load_limits
from spec_io import SpecFormatError, load_spec, to_document

log = logging.getLogger("pqw.cli")

EXIT_OK, EXIT_INVALID, EXIT_UNDETERMINED, EXIT_FAILED = 0, 2, 3, 4

INVALID_INPUT = (SpecFormatError, GroupError, GeneratingVectorError, GenusError, SettingsError,
                 BranchDataError, CoverError)
OUT_OF_RESOURCES = (BudgetError, CensusBudgetError, UnsupportedError)


# ── Helpers ───────────────────────────────────────────────────────────────────

def _load(args):
    """(SpecDocument, Limits) with the document's own limits merged in."""
    base = load_limits(args.limits, config_path=args.config)
    doc = load_spec(args.spec, max_group_order=base.max_group_order)
    limits = load_limits(args.limits, config_path=args.config, document=doc.limits) if doc.limits else base
    return doc, limits


def _subgroup(group: FiniteGroup, text: str | None, fallback: Subgroup | None = None) -> Subgroup:
    if text is None:
        if fallback is None:
            raise CoverError("no subgroup given (use --subgroup or a 'subgroup' entry in the specification)")
        return fallback
    if text.strip() == "H":
        return families.klein_subgroup(group)
    labels = ["(" + part.strip(" ()") + ")" for part in text.replace("),", ")|").split("|") if part.strip()]
    return subgroup_generated(group, labels, name="H")


def _invariants(spec, limits):
    census = singular_census(spec, limits.census_budget)
    kodaira = kodaira_report(spec, census)
    return census, reporting.invariants_block(spec, census, kodaira), kodaira


def _emit(args, report: dict) -> None:
    reporting.validate_report(report)
    if args.json:
        reporting.write(report, args.json)
    if args.json != "-":
        sys.stdout.write(reporting.render_text(report))


def _timing(args, timing: dict) -> dict | None:
    return None if args.no_timing else timing


def _exit_for(verdict: str) -> int:
    return {reporting.FAIL: EXIT_FAILED, reporting.UNDETERMINED: EXIT_UNDETERMINED}.get(verdict, EXIT_OK)


# ── Commands ──────────────────────────────────────────────────────────────────

def cmd_validate(args) -> int:
    doc, limits = _load(args)
    spec = doc.spec
    message = (f"{args.spec}: valid, {spec.n} factor(s) over {spec.group.name} "
               f"(order {spec.group.order}), genera {', '.join(map(str, spec.genera))}")
    report = reporting.build_report("validate", limits, verdict=reporting.OK, timing=None,
                                    spec=to_document(spec, doc.subgroup), message=message)
    _emit(args, report)
    return EXIT_OK


def cmd_invariants(args) -> int:
    start = time.perf_counter()
    doc, limits = _load(args)
    _, block, _ = _invariants(doc.spec, limits)
    report = reporting.build_report("invariants", limits, verdict=reporting.OK,
                                    timing=_timing(args, {"total": time.perf_counter() - start}),
                                    spec=to_document(doc.spec, doc.subgroup), invariants=block)
    _emit(args, report)
    return EXIT_OK


def cmd_pi1(args) -> int:
    start = time.perf_counter()
    doc, limits = _load(args)
    spec = doc.spec
    result = armstrong_pi1(spec, limits, seed=args.seed)
    cover = None
    if result.certified:
        cover = universal_cover_report(spec, result, singular_census(spec, limits.census_budget)).as_dict()
    verdict = reporting.UNDETERMINED if result.status == "undetermined" else reporting.OK
    report = reporting.build_report("pi1", limits, verdict=verdict,
                                    timing=_timing(args, {"total": time.perf_counter() - start}),
                                    spec=to_document(spec, doc.subgroup),
                                    pi1=result.as_dict(timing=not args.no_timing),
                                    universal_cover=cover,
                                    flags={"beyond_verified_range": result.beyond_verified_range})
    _emit(args, report)
    return _exit_for(verdict)


def cmd_cover(args) -> int:
    start = time.perf_counter()
    doc, limits = _load(args)
    subgroup = _subgroup(doc.spec.group, args.subgroup, doc.subgroup)
    result = etale_intermediate_cover(doc.spec, subgroup, limits.census_budget)
    report = reporting.build_report("cover", limits, verdict=reporting.OK,
                                    timing=_timing(args, {"total": time.perf_counter() - start}),
                                    spec=to_document(doc.spec, subgroup), cover=result.as_dict())
    _emit(args, report)
    return EXIT_OK


def cmd_paper(args) -> int:
    start = time.perf_counter()
    limits = load_limits(args.limits, config_path=args.config)
    name, n = args.family.upper(), args.n
    spec = families.family(name, n)
    expected = families.expected_values(name, n)
    timing = {}

    census, block, kodaira = _invariants(spec, limits)
    checks = [
        reporting.check("singular points", expected["singular_points"], census.singular_points),
        reporting.check("all singularities of type 1/2(1,...,1)", True, census.all_half_type),
        reporting.check("h1(Theta)", expected["h1_theta"], h1_theta(spec)),
        reporting.check("b1", expected["b1"], betti_b1(spec)),
        reporting.check("kappa", expected["kappa"], kodaira.kappa),
    ]
    if name == "X":
        cover = etale_intermediate_cover(spec, families.klein_subgroup(spec.group), limits.census_budget)
        checks += [
            reporting.check("cover by Y is unramified of degree 4", [True, 4], [cover.unramified, cover.degree]),
            reporting.check("each singular point has 4 singular preimages", True, cover.singularities_lift),
        ]
    timing["invariants"] = time.perf_counter() - start

    pi1_block = universal = None
    undetermined = False
    if not args.skip_pi1:
        result = armstrong_pi1(spec, limits, seed=args.seed)
        pi1_block = result.as_dict(timing=not args.no_timing)
        timing["pi1"] = sum(result.timing.values())
        if result.certified:
            uc = universal_cover_report(spec, result, census)
            universal = uc.as_dict()
            checks += [
                reporting.check("pi1 order", expected["pi1_order"], result.order),
                reporting.check("pi1 type", expected["pi1_type"], result.tag),
                reporting.check("universal cover singular points", expected["universal_cover_singular_points"],
                                uc.singular_points),
            ]
            if name == "X":
                partner = armstrong_pi1(families.y_family(n), limits)
                if partner.certified:
                    checks.append(reporting.check("|pi1(X)| = 4 |pi1(Y)|", result.order, 4 * partner.order))
        else:
            undetermined = True
            checks.append(reporting.check("pi1 order", expected["pi1_order"], None, undetermined=True))

    verdict = reporting.verdict(checks, undetermined)
    timing["total"] = time.perf_counter() - start
    report = reporting.build_report("paper", limits, verdict=verdict, timing=_timing(args, timing),
                                    spec=to_document(spec), invariants=block, pi1=pi1_block,
                                    universal_cover=universal, checks=checks,
                                    flags={"beyond_verified_range": n > 5,
                                           "generating_vector": families.VECTOR_SOURCE})
    _emit(args, report)
    return _exit_for(verdict)


def cmd_fermat_verify(args) -> int:
    start = time.perf_counter()
    limits = load_limits(args.limits, config_path=args.config)
    spec = families.x_family(1)
    subgroup = _subgroup(spec.group, args.subgroup) if args.subgroup else None
    result = verify_marked_points(subgroup, spec)
    verdict = reporting.PASS if result.passed else reporting.FAIL
    report = reporting.build_report("fermat-verify", limits, verdict=verdict,
                                    timing=_timing(args, {"total": time.perf_counter() - start}),
                                    fermat=result.as_dict())
    _emit(args, report)
    return _exit_for(verdict)


# ── Argument parsing ──────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--limits", default=None, help="e.g. max-cosets=500000,max-relators=200000")
    common.add_argument("--json", metavar="PATH", default=None, help="write the JSON report ('-' = stdout)")
    common.add_argument("--no-timing", action="store_true", help="omit wall-clock fields (deterministic output)")
    common.add_argument("--config", default=None, help="config.yaml to use instead of the search path")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="pqw", description="Invariants and fundamental groups of product-quotient varieties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a specification file")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("invariants", parents=[common], help="census, h1(Theta), b1, Kodaira flags")
    p.add_argument("spec")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("pi1", parents=[common], help="fundamental group of the quotient")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=None, help="shuffle the coset transversal")
    p.set_defaults(func=cmd_pi1)

    p = sub.add_parser("cover", parents=[common], help="intermediate cover for a normal subgroup")
    p.add_argument("spec")
    p.add_argument("--subgroup", default=None, help="'H' or generator labels, e.g. \"(2,0),(0,2)\"")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("paper", parents=[common], help="rebuild the X or Y family and compare")
    p.add_argument("--family", required=True, type=str.upper, choices=families.FAMILIES)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--skip-pi1", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_paper)

    p = sub.add_parser("fermat-verify", parents=[common], help="exact check of the Fermat quartic data")
    p.add_argument("--subgroup", default=None, help="also report orbits of this subgroup ('H' or labels)")
    p.set_defaults(func=cmd_fermat_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s: %(message)s', stream=sys.stderr)
    if args.command == "paper" and args.n < 2:
        parser.error("--n must be at least 2")

    try:
        return args.func(args)
    except INVALID_INPUT as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OUT_OF_RESOURCES as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except (UncertifiedError, jsonschema.ValidationError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAILED
    except Exception as e:
        log.debug("internal error", exc_info=True)
        print(f"ERROR: internal error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
