import argparse

from loguru import logger

from compmdp.cli.deps import common_options, emit
from compmdp.cli.commands.check import DEFAULT_REGIONS
from compmdp.model.diagrams import ZigZagDiagram
from compmdp.services.worlds import worlds_service
from compmdp.services.zigzag import zigzag_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("demo", parents=[common_options()], help="build a worked example and check it")
    parser.add_argument("world", choices=["gridworld", "regions", "fetch"])
    parser.add_argument("--raw", action="store_true", help="skip the forward-moving simplifications")
    parser.set_defaults(handler=demo)


def build_demo(world: str, raw: bool = False) -> ZigZagDiagram:
    if world == "gridworld":
        safe, _ = worlds_service.safe_grid(worlds_service.course_layout())
        return ZigZagDiagram((safe,))
    if world == "regions":
        return worlds_service.sequential_regions(worlds_service.course_layout(), DEFAULT_REGIONS, forward_moving=not raw)
    return worlds_service.fetch_and_place(stationary=not raw)


def demo(args: argparse.Namespace) -> int:
    """Run the stitching check on one of the built-in worlds"""

    z = build_demo(args.world, args.raw)
    logger.info(f"Demo {args.world}: {len(z.environments)} environments")
    report = zigzag_service.verify_stitching(z, args.gamma, args.tol)
    emit(report, args.output)
    return 0 if report.passed else 1
