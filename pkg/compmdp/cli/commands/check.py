import argparse
from pathlib import Path
from typing import List

from loguru import logger

from compmdp.cli.deps import common_options, emit, random_options
from compmdp.core.exceptions import SemanticError
from compmdp.io.documents import GeneratorSet, load_bindings, load_document, parse_label
from compmdp.io.evaluator import evaluate
from compmdp.io.expr import parse_expr
from compmdp.model.diagrams import ZigZagDiagram
from compmdp.model.mdp import FiniteMdp
from compmdp.schemas import CheckReport, GridLayout
from compmdp.services.composition import composition_service
from compmdp.services.morphism import morphism_service
from compmdp.services.puncture import puncture_service
from compmdp.services.sampling import sampling_service
from compmdp.services.symmetry import symmetry_service
from compmdp.services.worlds import cell_label, worlds_service
from compmdp.services.zigzag import zigzag_service

MIRROR_LAYOUT = GridLayout(width=4, height=4, obstacles=[(1, 1), (1, 2)], goals=[(0, 0), (0, 3)])
DEFAULT_REGIONS = [(3, 3), (0, 0), (0, 3)]


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", parents=[common_options()], help="verify a property, PASS or FAIL")
    parser.add_argument("property", choices=["stitching", "theorem3", "pushforward", "static-obstacles", "quotient"])
    parser.add_argument("inputs", nargs="*", type=Path, help="documents or expression file the property reads")
    parser.add_argument("--bind", action="append", default=[], metavar="NAME=path", help="bind a name to a document")
    parser.add_argument("--docs", type=Path, help="bind every *.json here by file stem")
    parser.add_argument("--first", action="append", default=[], help="first obstacle group (repeatable)")
    parser.add_argument("--second", action="append", default=[], help="second obstacle group (repeatable)")
    parser.add_argument("--repair", action="store_true", help="make the diagram forward-moving before checking")
    random_options(parser)
    parser.set_defaults(handler=check)


def _mdp(path: Path) -> FiniteMdp:
    doc = load_document(path)
    if not isinstance(doc, FiniteMdp):
        raise SemanticError(f"{path} is not an MDP document")
    return doc


def check_stitching(args: argparse.Namespace) -> int:
    """Stitched component policies against the optimum of the composite"""

    if args.inputs:
        exprfile = args.inputs[0]
        bindings = load_bindings(args.bind, args.docs or exprfile.parent)
        z = evaluate(parse_expr(exprfile.read_text(encoding="utf-8")), bindings, eps=args.eps, budget=args.budget)
        if not isinstance(z, ZigZagDiagram):
            raise SemanticError(f"{exprfile} does not describe a zig-zag diagram")
    else:
        z = worlds_service.sequential_regions(worlds_service.course_layout(), DEFAULT_REGIONS)
    if args.repair:
        z = zigzag_service.make_forward_moving(z)

    report = zigzag_service.verify_stitching(z, args.gamma, args.tol)
    emit(report, args.output)
    return 0 if report.passed else 1


def check_pushforward(args: argparse.Namespace) -> int:
    """Fiber-product transitions push forward to the leg transitions on random cospans"""

    rng = sampling_service.rng(args.seed)
    failures: List[str] = []
    for trial in range(args.trials):
        r = composition_service.fiber_product(sampling_service.random_cospan(rng), args.budget)
        projections_ok = all(morphism_service.check_morphism(p, args.eps).ok for p in (r.proj1, r.proj2))
        if not (projections_ok and composition_service.check_pushforward_prop(r, args.eps)):
            failures.append(f"trial {trial}")

    report = CheckReport(
        check="pushforward",
        passed=not failures,
        trials=args.trials,
        failures=failures,
        details={"seed": args.seed},
    )
    emit(report, args.output)
    return 0 if report.passed else 1


def check_static_obstacles(args: argparse.Namespace) -> int:
    """Puncturing two obstacle groups separately and jointly forms a fiber and a pushout square"""

    if args.inputs:
        m = _mdp(args.inputs[0])
        first = [parse_label(x) for x in args.first]
        second = [parse_label(x) for x in args.second]
    else:
        layout = worlds_service.course_layout()
        m = worlds_service.grid_from_layout(layout)
        first, second = ([cell_label(c) for c in group] for group in worlds_service.course_obstacle_groups())

    passed = puncture_service.check_static_obstacles(m, first, second, args.eps)
    report = CheckReport(
        check="static-obstacles",
        passed=passed,
        failures=[] if passed else ["squares do not commute up to isomorphism"],
        details={"states": m.n_states, "first": [str(x) for x in first], "second": [str(x) for x in second]},
    )
    emit(report, args.output)
    return 0 if report.passed else 1


def check_quotient(args: argparse.Namespace) -> int:
    """Orbit quotient equals the self-gluing along M x G, and its policy lifts back greedily"""

    if len(args.inputs) >= 2:
        m = _mdp(args.inputs[0])
        generator_set = load_document(args.inputs[1])
        if not isinstance(generator_set, GeneratorSet):
            raise SemanticError(f"{args.inputs[1]} is not a group document")
        group = symmetry_service.close_group(m, generator_set.generators, args.budget, args.eps)
    else:
        m, _ = worlds_service.safe_grid(MIRROR_LAYOUT)
        group = worlds_service.mirror_group(m, MIRROR_LAYOUT)

    failures: List[str] = []
    if not symmetry_service.check_quotient_matches_pushout(m, group, args.eps):
        failures.append("orbit quotient differs from the pushout of (pr1, rho)")
    quotient_mdp, _ = symmetry_service.quotient(m, group, args.eps)
    if m.has_reward:
        misses = symmetry_service.check_policy_lift(m, group, args.gamma, eps=args.eps)
        failures.extend(f"lifted policy is not greedy at {s}" for s in misses)

    report = CheckReport(
        check="quotient",
        passed=not failures,
        failures=failures,
        details={"order": group.order, "states": m.n_states, "orbits": quotient_mdp.n_states},
    )
    emit(report, args.output)
    return 0 if report.passed else 1


CHECKS = {
    "stitching": check_stitching,
    "theorem3": check_stitching,
    "pushforward": check_pushforward,
    "static-obstacles": check_static_obstacles,
    "quotient": check_quotient,
}


def check(args: argparse.Namespace) -> int:
    logger.info(f"Checking {args.property}")
    return CHECKS[args.property](args)
