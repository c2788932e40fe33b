import argparse

from loguru import logger

from compmdp.cli.deps import common_options, write_output
from compmdp.core.exceptions import SemanticError
from compmdp.io.documents import load_document, serialize_solution
from compmdp.model.mdp import FiniteMdp
from compmdp.services.solver import solver_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", parents=[common_options()], help="value iteration on an MDP document")
    parser.add_argument("file", help="MDP document with rewards")
    parser.add_argument("--max-iter", type=int, default=None, help="sweep limit")
    parser.set_defaults(handler=solve)


def solve(args: argparse.Namespace) -> int:
    """Write optimal values and the greedy policy"""

    m = load_document(args.file)
    if not isinstance(m, FiniteMdp):
        raise SemanticError(f"{args.file} is not an MDP document")

    solution = solver_service.value_iteration(m, args.gamma, args.tol, args.max_iter, args.parallel)
    logger.info(f"Solved in {solution.iterations} sweeps, residual {solution.residual:.3e}")
    write_output(serialize_solution(solution), args.output)
    return 0 if solution.converged else 1
