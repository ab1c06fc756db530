"""Command-line pipeline over model files.

Commands take a model file path or a bundled fixture name (append `_bg`
for the bond-graph form). Bundled fixtures carry default simulation grids;
arbitrary files need --dt/--steps for the time-domain commands.

Exit codes: 0 success, 1 validation or comparison failure, 2 solver
underdetermined/inconsistent, 3 I/O or usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import fixtures
from .errors import HfnetError, InconsistentError, UnderdeterminedError
from .esn import build_esn, reduced_incidence, write_matrix_csv, write_matrix_triplets
from .hfnmcf import assemble, solve
from .model import load_model, validate_model
from .normal_tree import build_normal_tree
from .oracle import euler_integrate, make_ode_run, rk4_integrate
from .statespace import derive_state_space, law_listing
from .trajectories import TimeGrid, compare

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _resolve_model(arg: str):
    """Return (model, default_grid_or_None, name)."""
    if os.path.exists(arg):
        model = load_model(arg)
        grid = fixtures.FIXTURE_GRIDS.get(model.name)
        return model, (TimeGrid(*grid) if grid else None), model.name
    name, bondgraph = arg, False
    if name.endswith("_bg"):
        name, bondgraph = name[:-3], True
    if name in fixtures.FIXTURE_NAMES:
        model = fixtures.load_fixture(name, bondgraph=bondgraph)
        return model, fixtures.fixture_grid(name), model.name
    raise FileNotFoundError(
        f"{arg!r} is neither a file nor a bundled fixture "
        f"(have: {', '.join(fixtures.FIXTURE_NAMES)})"
    )


def _grid(args, default):
    dt = args.dt if args.dt is not None else (default.dt if default else None)
    steps = args.steps if args.steps is not None else (default.steps if default else None)
    if dt is None or steps is None:
        raise HfnetError("this command needs --dt and --steps (no fixture default)")
    return TimeGrid(dt, steps)


def _ics(args) -> dict:
    out = {}
    for item in args.ic or []:
        if "=" not in item:
            raise HfnetError(f"--ic expects name=value, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = float(value)
    return out


def _validated(model) -> list[str]:
    report = validate_model(model)
    for line in report:
        print(f"invalid: {line}")
    return report


def _out_path(args, name, suffix) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, f"{name}_{suffix}")


def cmd_validate(args) -> int:
    model, _, _ = _resolve_model(args.model)
    report = _validated(model)
    if report:
        return EXIT_VALIDATION
    print(f"{model.name}: ok ({len(model.nodes)} nodes, {len(model.elements)} elements)")
    return EXIT_OK


def cmd_net(args) -> int:
    model, _, name = _resolve_model(args.model)
    if _validated(model):
        return EXIT_VALIDATION
    esn = build_esn(model, validate=False)
    red = reduced_incidence(esn)
    caps = [c.id for c in esn.capabilities]
    write_matrix_csv(esn.m_plus, _out_path(args, name, "M_plus.csv"), esn.buffers, caps)
    write_matrix_csv(esn.m_minus, _out_path(args, name, "M_minus.csv"), esn.buffers, caps)
    write_matrix_csv(esn.m, _out_path(args, name, "M.csv"), esn.buffers, caps)
    write_matrix_csv(red, _out_path(args, name, "M_reduced.csv"), esn.reduced_buffers, caps)
    for label, mat in (("M_plus", esn.m_plus), ("M_minus", esn.m_minus), ("M", esn.m)):
        write_matrix_triplets(mat, _out_path(args, name, f"{label}.triplets.txt"))
    print(f"{name}: {esn.n_buffers} buffers, {esn.n_capabilities} capabilities; "
          f"reduced incidence {red.shape[0]}x{red.shape[1]} written to {args.out}")
    return EXIT_OK


_CLASS_RANK = {
    "across_source": 0, "a_type": 1, "transformer": 2, "gyrator": 2,
    "d_type": 3, "t_type": 4, "through_source": 5,
}


def _tree_print_order(model, edge_ids):
    def key(edge_id):
        elem = model.element(edge_id.split(".")[0])
        return (_CLASS_RANK[elem.kind], edge_id)

    return sorted(edge_ids, key=key)


def cmd_tree(args) -> int:
    model, _, name = _resolve_model(args.model)
    if _validated(model):
        return EXIT_VALIDATION
    tree = build_normal_tree(model)
    print(f"tree: {', '.join(_tree_print_order(model, tree.tree_elements))}; "
          f"links: {', '.join(sorted(tree.link_elements))}")
    for sv in tree.state_variables:
        print(f"state: {sv.name} ({sv.variable})")
    if tree.has_dependent_storage:
        print("dependent storage: " + ", ".join(tree.dependent_storage))
    return EXIT_OK


def cmd_derive(args) -> int:
    model, _, name = _resolve_model(args.model)
    if _validated(model):
        return EXIT_VALIDATION
    ss = derive_state_space(model)
    write_matrix_csv(ss.a, _out_path(args, name, "A.csv"), ss.state_names, ss.state_names)
    write_matrix_csv(ss.b, _out_path(args, name, "B.csv"), ss.state_names, ss.input_names)
    with open(_out_path(args, name, "laws.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(law_listing(model)) + "\n")
    print(f"{name}: {len(ss.state_names)} states {list(ss.state_names)}, "
          f"{len(ss.input_names)} inputs; A, B, laws written to {args.out}")
    return EXIT_OK


def _solve_pipeline(args, model, name, grid):
    esn = build_esn(model, validate=False)
    cs = assemble(model, esn, grid, overrides=_ics(args))
    if args.dump_system:
        cs.dump(_out_path(args, name, "system.txt"))
    solution = solve(cs)
    print(f"{name}: solved {cs.n_rows} equations ({solution.method}); "
          f"residual {solution.residual:.3e}")
    return solution


def cmd_solve(args) -> int:
    model, default, name = _resolve_model(args.model)
    if _validated(model):
        return EXIT_VALIDATION
    grid = _grid(args, default)
    solution = _solve_pipeline(args, model, name, grid)
    path = _out_path(args, name, "hfnmcf.csv")
    solution.trajectories.to_csv(path)
    print(f"trajectories -> {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model, default, name = _resolve_model(args.model)
    if _validated(model):
        return EXIT_VALIDATION
    grid = _grid(args, default)
    run = make_ode_run(model, grid, _ics(args))
    integrate = rk4_integrate if args.method == "rk4" else euler_integrate
    traj = integrate(run)
    path = _out_path(args, name, f"oracle_{args.method}.csv")
    traj.to_csv(path)
    print(f"{name}: {args.method} oracle trajectories -> {path}")
    return EXIT_OK


def _compare_pipeline(args, model, name, grid) -> int:
    solution = _solve_pipeline(args, model, name, grid)
    run = make_ode_run(model, grid, _ics(args))
    oracle = euler_integrate(run)
    solution.trajectories.to_csv(_out_path(args, name, "hfnmcf.csv"))
    oracle.to_csv(_out_path(args, name, "oracle_euler.csv"))
    report = compare(solution.trajectories, oracle, tol=args.tol)
    with open(_out_path(args, name, "compare.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(report.lines()) + "\n")
    worst = report.worst
    print(f"{name}: worst deviation {worst.label} rel {worst.max_rel:.3e} "
          f"({'PASS' if report.passed else 'FAIL'} at {args.tol:g})")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_compare(args) -> int:
    model, default, name = _resolve_model(args.model)
    if _validated(model):
        return EXIT_VALIDATION
    return _compare_pipeline(args, model, name, _grid(args, default))


def cmd_all(args) -> int:
    if args.fixtures:
        names = list(fixtures.FIXTURE_NAMES)
        with ThreadPoolExecutor(max_workers=min(6, len(names))) as pool:
            codes = list(pool.map(lambda n: _run_all_one(args, n), names))
        return max(codes)
    return _run_all_one(args, args.model)


def _run_all_one(args, model_arg) -> int:
    model, default, name = _resolve_model(model_arg)
    if _validated(model):
        return EXIT_VALIDATION
    grid = _grid(args, default)
    code = cmd_net(_clone(args, model_arg))
    if code:
        return code
    code = cmd_derive(_clone(args, model_arg))
    if code:
        return code
    return _compare_pipeline(args, model, name, grid)


def _clone(args, model_arg):
    clone = argparse.Namespace(**vars(args))
    clone.model = model_arg
    return clone


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfnet",
        description="lumped-parameter netlists: validate, derive, solve, verify",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_grid=False):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        if name == "all":
            p.add_argument("model", nargs="?", help="model file or fixture name")
            p.add_argument("--fixtures", action="store_true",
                           help="run every bundled fixture at its default grid")
        else:
            p.add_argument("model", help="model file or fixture name")
        p.add_argument("--out", default=".", help="output directory")
        if needs_grid:
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--steps", type=int, default=None)
            p.add_argument("--ic", action="append", metavar="NAME=VALUE")
            p.add_argument("--tol", type=float, default=1e-6)
            p.add_argument("--dump-system", action="store_true")
        return p

    add("validate", cmd_validate)
    add("net", cmd_net)
    add("tree", cmd_tree)
    add("derive", cmd_derive)
    add("solve", cmd_solve, needs_grid=True)
    p = add("simulate", cmd_simulate, needs_grid=True)
    p.add_argument("--method", choices=("euler", "rk4"), default="euler")
    add("compare", cmd_compare, needs_grid=True)
    add("all", cmd_all, needs_grid=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "all" and not args.fixtures and not args.model:
        print("error: `all` needs a model or --fixtures", file=sys.stderr)
        return EXIT_IO
    try:
        return args.func(args)
    except (UnderdeterminedError, InconsistentError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FileNotFoundError, json.JSONDecodeError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except HfnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
