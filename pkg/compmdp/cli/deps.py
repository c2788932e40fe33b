import argparse
import sys
from pathlib import Path
from typing import Optional

from loguru import logger
from pydantic import BaseModel

from compmdp.core.config import settings

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def configure_logging(verbose: bool = False) -> None:
    """Single stderr sink; stdout is reserved for documents and reports."""
    logger.remove()
    # sys.stderr is looked up per message
    logger.add(
        lambda message: sys.stderr.write(message),
        format=LOG_FORMAT,
        level="DEBUG" if verbose else settings.LOG_LEVEL,
    )


def common_options() -> argparse.ArgumentParser:
    """Flags shared by every subcommand."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parent.add_argument("-o", "--output", type=Path, help="write the result here instead of stdout")
    parent.add_argument("--format", choices=["json"], default="json", help="output format")
    parent.add_argument("--gamma", type=float, default=settings.GAMMA, help="discount factor")
    parent.add_argument("--tol", type=float, default=settings.TOLERANCE, help="value tolerance")
    parent.add_argument("--eps", type=float, default=settings.EPSILON, help="measure equality tolerance")
    parent.add_argument("--budget", type=int, default=None, help="size guard for products and enumerations")
    parent.add_argument("--parallel", action="store_true", default=settings.PARALLEL_SWEEP, help="parallel sweeps")
    return parent


def random_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    parser.add_argument("--trials", type=int, default=100, help="number of random instances")


def write_output(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def emit(model: BaseModel, path: Optional[Path]) -> None:
    write_output(model.model_dump_json(indent=2) + "\n", path)
