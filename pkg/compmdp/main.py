import argparse
import sys
from typing import List, Optional

from loguru import logger

from compmdp.cli.commands import check, compose, demo, solve, validate
from compmdp.cli.deps import configure_logging
from compmdp.core.config import settings
from compmdp.core.exceptions import CompMdpError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compmdp",
        description="Compose finite MDPs from sub-MDPs, solve them, and check the stitching guarantees.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register command routers
    for command in (validate, compose, solve, check, demo):
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code is None else int(e.code)

    configure_logging(args.verbose)
    logger.debug(f"Environment {settings.PYTHON_ENV}, command {args.command}")
    try:
        return args.handler(args)
    except CompMdpError as e:
        logger.error(e.detail)
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
