import argparse
import json
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

from cli.parser import (
    parse_courant_section,
    parse_field,
    parse_form,
    parse_poly,
    parse_super,
    parse_tilde,
    parse_vertex_section,
)
from constant.defaults import TOOL_VERSION
from constant.signs import SIGN_NAMES
from lib.courant import (
    Connection,
    CourantModel,
    c_add,
    c_bracket,
    c_pairing,
    c_scale,
    check_courant_axioms,
    curvature,
    flat_connection,
)
from lib.report import Report
from lib.splitting import unique_flat_connection_dg
from lib.supercalc import SuperElement
from lib.symcalc import Form, constant_term, contract, exterior_d, lie_derivative, poincare_homotopy, render_poly, wedge
from lib.truncated import check_truncated_axioms, sign_search, to_truncated
from lib.vertex import (
    SignVector,
    VertexModel,
    VertexModelTwisted,
    check_algebroid_identities,
    star,
    torsor_add,
    torsor_diff,
    torsor_pair,
    v_bracket,
    v_pairing,
)
from lib.window import (
    Truncation,
    check_ideal_invariance,
    ideal_basis,
    ideal_membership,
    u_exactness_check,
    u_normal_form,
)
from utils.config import RunConfig, load_config
from utils.logger import get_logger

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

SUBCOMMANDS = {
    "courant": ("bracket", "pairing", "curvature", "flat", "add", "scale", "check"),
    "vertex": ("bracket", "pairing", "star", "check", "signsearch", "torsor-add", "torsor-diff"),
    "chiral": ("build", "member", "normal", "check", "flat"),
    "calc": ("d", "wedge", "iota", "lie", "kappa"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vertex-algebroids", description="Exact computations with Courant and vertex algebroids.")
    groups = parser.add_subparsers(dest="group", required=True)
    for group, actions in SUBCOMMANDS.items():
        sub = groups.add_parser(group).add_subparsers(dest="action", required=True)
        for action in actions:
            _add_flags(sub.add_parser(action))
    return parser


def _add_flags(parser: argparse.ArgumentParser) -> None:
    for name in ("n", "maxdeg", "trials", "seed", "truncate"):
        parser.add_argument(f"--{name}", type=int, default=None)
    for name in ("twist", "left", "right", "beta", "lambda", "out", "config"):
        parser.add_argument(f"--{name}", default=None)
    for name in SIGN_NAMES:
        parser.add_argument(f"--sign-{name}", dest=f"sign_{name}", type=int, choices=(1, -1), default=None)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    overrides: dict[str, Any] = {name: getattr(args, name) for name in ("n", "maxdeg", "trials", "seed", "truncate", "out")}
    overrides["signs"] = {name: getattr(args, f"sign_{name}") for name in SIGN_NAMES if getattr(args, f"sign_{name}") is not None}
    return base.merged(overrides)


def _signs(config: RunConfig) -> SignVector:
    return SignVector(**config.signs)


def _required(args: argparse.Namespace, name: str) -> str:
    value = getattr(args, name)
    if value is None:
        raise ValueError(f"--{name} is required for this command")
    return value


def _twist(args: argparse.Namespace, n: int, name: str = "twist") -> Form:
    text = getattr(args, name)
    return parse_form(text, n, 3) if text else Form.zero(n, 3)


def _vertex_model(args: argparse.Namespace, config: RunConfig) -> VertexModel | VertexModelTwisted:
    base = VertexModel(config.n, _signs(config))
    H = _twist(args, config.n)
    return base if H.is_zero() else VertexModelTwisted(base, H)


def _value(result: Any) -> dict[str, Any]:
    return {"result": render_poly(result) if not hasattr(result, "render") else result.render()}


# --------------------------------------------------
# courant
# --------------------------------------------------


def courant_command(action: str, args: argparse.Namespace, config: RunConfig) -> Any:
    n = config.n
    if action == "check":
        return check_courant_axioms(CourantModel(n, _twist(args, n)), config.seed, config.trials, config.maxdeg)
    if action in ("bracket", "pairing"):
        model = CourantModel(n, _twist(args, n))
        left = parse_courant_section(_required(args, "left"), n)
        right = parse_courant_section(_required(args, "right"), n)
        return _value(c_bracket(model, left, right) if action == "bracket" else c_pairing(model, left, right))
    if action == "curvature":
        model = CourantModel(n, _twist(args, n))
        B = parse_form(args.beta, n, 2) if args.beta else Form.zero(n, 2)
        return _value(curvature(model, Connection(B)))
    if action == "flat":
        model = CourantModel(n, _twist(args, n))
        connection = flat_connection(model)
        return {"connection": connection.B.render(), "curvature": curvature(model, connection).render()}
    if action == "add":
        total = c_add(CourantModel(n, _twist(args, n, "left")), CourantModel(n, _twist(args, n, "right")))
        return {"twist": total.H.render()}
    lam = parse_poly(_required(args, "lambda"), n)
    if not lam.is_ground:
        raise ValueError(f"--lambda must be a rational number, got {render_poly(lam)}")
    scaled = c_scale(constant_term(lam), CourantModel(n, _twist(args, n)))
    return {"twist": scaled.H.render()}


# --------------------------------------------------
# vertex
# --------------------------------------------------


def vertex_command(action: str, args: argparse.Namespace, config: RunConfig) -> Any:
    n = config.n
    if action == "signsearch":
        survivors = sign_search(n, config.seed, config.trials, config.maxdeg)
        return {"survivors": [s.to_dict() for s in survivors], "count": len(survivors)}
    if action == "torsor-diff":
        V2 = VertexModelTwisted(VertexModel(n, _signs(config)), _twist(args, n, "left"))
        V1 = VertexModelTwisted(VertexModel(n, _signs(config)), _twist(args, n, "right"))
        return {"twist": torsor_diff(V2, V1).H.render()}
    model = _vertex_model(args, config)
    if action == "check":
        axioms = check_truncated_axioms(to_truncated(model), config.seed, config.trials, config.maxdeg)
        identities = check_algebroid_identities(model, config.seed, config.trials, config.maxdeg)
        extra = {"truncated-axioms": len(axioms.checks), "identities": identities.to_dict()}
        return Report("vertex-check", axioms.checks + identities.checks, config.seed, {**axioms.config}, extra)
    if action == "torsor-add":
        q = CourantModel(n, parse_form(_required(args, "beta"), n, 3))
        combined = torsor_add(q, model)
        payload: dict[str, Any] = {"model": combined.render(), "twist": combined.H.render()}
        if args.left and args.right:
            payload["section"] = torsor_pair(parse_courant_section(args.left, n), parse_vertex_section(args.right, n)).render()
        return payload
    if action == "star":
        f = parse_poly(_required(args, "left"), n)
        return _value(star(model, f, parse_vertex_section(_required(args, "right"), n)))
    left = parse_vertex_section(_required(args, "left"), n)
    right = parse_vertex_section(_required(args, "right"), n)
    return _value(v_bracket(model, left, right) if action == "bracket" else v_pairing(model, left, right))


# --------------------------------------------------
# chiral
# --------------------------------------------------


def chiral_command(action: str, args: argparse.Namespace, config: RunConfig) -> Any:
    truncation = Truncation(config.n, config.truncate)
    if action == "build":
        basis = ideal_basis(truncation)
        blocks = [
            {"weight": b.weight, "degree": b.degree, "tilde": b.dimension, "ideal": b.rank, "quotient": b.dimension - b.rank}
            for b in basis.blocks.values()
        ]
        return {"blocks": blocks}
    if action == "member":
        return {"member": ideal_membership(parse_tilde(_required(args, "left"), config.n), truncation)}
    if action == "normal":
        return _value(u_normal_form(parse_tilde(_required(args, "left"), config.n), truncation))
    if action == "flat":
        H = parse_super(args.twist, config.n) if args.twist else SuperElement.zero(config.n)
        differential = parse_form(args.beta, config.n, 2) if args.beta else None
        return unique_flat_connection_dg(H, truncation, differential)
    invariance = check_ideal_invariance(truncation, config.seed, config.trials)
    exactness = u_exactness_check(truncation)
    return Report("chiral-check", invariance.checks + exactness.checks, config.seed, {**invariance.config}, exactness.extra)


# --------------------------------------------------
# calc
# --------------------------------------------------


def calc_command(action: str, args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    n = config.n
    if action == "d":
        return _value(exterior_d(parse_form(_required(args, "left"), n)))
    if action == "kappa":
        return _value(poincare_homotopy(parse_form(_required(args, "left"), n)))
    if action == "wedge":
        return _value(wedge(parse_form(_required(args, "left"), n), parse_form(_required(args, "right"), n)))
    xi = parse_field(_required(args, "left"), n)
    omega = parse_form(_required(args, "right"), n)
    return _value(contract(xi, omega) if action == "iota" else lie_derivative(xi, omega))


COMMANDS: dict[str, Callable[[str, argparse.Namespace, RunConfig], Any]] = {
    "courant": courant_command,
    "vertex": vertex_command,
    "chiral": chiral_command,
    "calc": calc_command,
}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger = get_logger(f"Cli.{args.group.capitalize()}")
    try:
        config = resolve_config(args)
        outcome = COMMANDS[args.group](args.action, args, config)
    except ValueError as e:
        logger.error("%s %s: %s", args.group, args.action, e)
        return EXIT_INPUT

    passed = True
    if isinstance(outcome, Report):
        passed = outcome.passed
        payload = {"command": f"{args.group} {args.action}", **outcome.to_dict()}
        payload["config"] = {**config.to_dict(), **payload["config"]}
    else:
        payload = {"tool-version": TOOL_VERSION, "command": f"{args.group} {args.action}", "config": config.to_dict(), **outcome}

    text = json.dumps(payload, indent=2, default=str)
    sys.stdout.write(text + "\n")
    if config.out:
        Path(config.out).write_text(text + "\n", encoding="utf-8")
        logger.info("Report written to %s", config.out)
    return EXIT_OK if passed else EXIT_FAILED
