import argparse
from pathlib import Path

from compmdp.cli.deps import common_options, write_output
from compmdp.io.documents import load_bindings, serialize_mdp
from compmdp.io.evaluator import evaluate
from compmdp.io.expr import parse_expr
from compmdp.model.diagrams import ZigZagDiagram
from compmdp.services.zigzag import zigzag_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("compose", parents=[common_options()], help="evaluate a composition expression")
    parser.add_argument("exprfile", type=Path, help="file holding one expression")
    parser.add_argument("--bind", action="append", default=[], metavar="NAME=path", help="bind a name to a document")
    parser.add_argument("--docs", type=Path, help="bind every *.json here by file stem (default: the expression's directory)")
    parser.set_defaults(handler=compose)


def compose(args: argparse.Namespace) -> int:
    """Evaluate an expression and write the resulting MDP document"""

    bindings = load_bindings(args.bind, args.docs or args.exprfile.parent)
    expr = parse_expr(args.exprfile.read_text(encoding="utf-8"))
    result = evaluate(expr, bindings, eps=args.eps, budget=args.budget)

    # a diagram is written as its composite
    if isinstance(result, ZigZagDiagram):
        result = zigzag_service.build_composite(result).mdp
    write_output(serialize_mdp(result), args.output)
    return 0
