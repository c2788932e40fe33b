import argparse

from loguru import logger

from compmdp.cli.deps import common_options, emit
from compmdp.io.documents import UnboundBridge, load_document
from compmdp.model.mdp import FiniteMdp
from compmdp.schemas import ValidationReport
from compmdp.services.mdp import mdp_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", parents=[common_options()], help="check a document")
    parser.add_argument("file", help="document to check")
    parser.set_defaults(handler=validate)


def validate(args: argparse.Namespace) -> int:
    """Report every structural violation of a document"""

    doc = load_document(args.file, check=False)
    if isinstance(doc, FiniteMdp):
        report = mdp_service.validate(doc, args.eps)
    elif isinstance(doc, UnboundBridge):
        report = mdp_service.validate(doc.mdp, args.eps)
        report.subject = "bridge"
    else:
        # morphisms and groups can only be checked against the MDPs they are used with
        report = ValidationReport(subject=type(doc).__name__)

    for issue in report.issues:
        logger.warning(issue.message)
    emit(report, args.output)
    return 0 if report.ok else 1
