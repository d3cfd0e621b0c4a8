"""Command-line surface for the mating engine.

Exit codes: 0 success, 2 invalid mating, 3 obstruction found (fsr), 4 no
pseudo-equator (pinched), 5 internal bound exceeded, 64 usage error.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction

import click

from . import angles as A
from .complexes import pullback_complex, quotient_complex, single_tree_skeleton
from .equator import PinchReport, decompose
from .errors import (
    ClosureDepthExceeded,
    DepthExceeded,
    InvalidMating,
    LevelTooDeep,
    LimbNotFound,
    MatingError,
    ObstructedMating,
    RepairFailed,
)
from .mating import ALPHA, BETA, Mating, validate
from .render import (
    complex_to_dot,
    complex_to_svg,
    expanded_to_dot,
    expanded_to_svg,
    to_json,
    tree_to_dot,
    tree_to_svg,
)
from .rules import check_subdivision, expanded_complex_at_level, extract_rule, iterate_rule
from .tree import build_tree
from .workspace import Workspace, default_workspace, dumps_canonical

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_OBSTRUCTED = 3
EXIT_PINCHED = 4
EXIT_BOUND = 5
EXIT_USAGE = 64


@dataclass
class Config:
    workspace: Workspace | None = None
    depth_bound: int = 10_000
    limb_bound: int = 64
    expansion_bound: int = 6


def _parse_angle(text: str) -> Fraction:
    try:
        return A.parse_angle(text)
    except (ValueError, ZeroDivisionError):
        raise click.UsageError(
            f"angles must be exact rationals like 3/4 (got {text!r}); decimals are rejected"
        )


def _mating(cfg: Config, a: Fraction, b: Fraction) -> Mating:
    return Mating(
        a,
        b,
        closure_bound=cfg.depth_bound,
        limb_bound=cfg.limb_bound,
    )


def _emit(cfg: Config, op: str, args: dict, compute) -> str:
    if cfg.workspace is not None:
        hit = cfg.workspace.get(op, args)
        if hit is not None:
            return hit
    result = compute()
    if cfg.workspace is not None:
        cfg.workspace.put(op, args, result)
    return result


@click.group()
@click.option("--workspace", type=click.Path(file_okay=False), default=None, help="Cache directory.")
@click.option("--depth-bound", type=int, default=10_000, show_default=True)
@click.option("--limb-bound", type=int, default=64, show_default=True)
@click.option("--expansion-bound", type=int, default=6, show_default=True)
@click.pass_context
def cli(ctx, workspace, depth_bound, limb_bound, expansion_bound):
    """Combinatorics of matings of critically preperiodic quadratic polynomials."""
    ws = Workspace(workspace) if workspace else default_workspace()
    ctx.obj = Config(
        workspace=ws,
        depth_bound=depth_bound,
        limb_bound=limb_bound,
        expansion_bound=expansion_bound,
    )


@cli.group()
def poly():
    """Single-polynomial structures."""


@poly.command("tree")
@click.argument("angle")
@click.pass_obj
def poly_tree(cfg: Config, angle):
    """Hubbard tree of a strictly preperiodic angle."""
    t = _parse_angle(angle)
    if not A.is_misiurewicz_angle(t):
        raise InvalidMating("NotMisiurewicz", A.format_angle(t))
    args = {"angle": A.format_angle(t)}
    click.echo(_emit(cfg, "poly-tree", args, lambda: to_json(build_tree(t))), nl=False)


@cli.group()
def mate():
    """Two-polynomial mating pipeline."""


@mate.command("validate")
@click.argument("a")
@click.argument("b")
@click.pass_obj
def mate_validate(cfg: Config, a, b):
    """Admissibility gate: strictly preperiodic, not in conjugate limbs."""
    ta, tb = _parse_angle(a), _parse_angle(b)
    spec = validate(ta, tb, cfg.limb_bound)
    click.echo(to_json(spec), nl=False)


@mate.command("partition")
@click.argument("a")
@click.argument("b")
@click.pass_obj
def mate_partition(cfg: Config, a, b):
    """Essential identification classes with their preimage depths."""
    ta, tb = _parse_angle(a), _parse_angle(b)
    args = {"a": A.format_angle(ta), "b": A.format_angle(tb), "depth": cfg.depth_bound}
    click.echo(
        _emit(cfg, "mate-partition", args, lambda: to_json(_mating(cfg, ta, tb).essential_partition())),
        nl=False,
    )


@mate.command("obstruction")
@click.argument("a")
@click.argument("b")
@click.pass_obj
def mate_obstruction(cfg: Config, a, b):
    """Check for identifications that block the two-tree construction."""
    ta, tb = _parse_angle(a), _parse_angle(b)

    def compute():
        m = _mating(cfg, ta, tb)
        report = m.obstruction_check(build_tree(ta, m.dendrites[ALPHA]), build_tree(tb, m.dendrites[BETA]))
        return to_json(report)

    args = {"a": A.format_angle(ta), "b": A.format_angle(tb)}
    click.echo(_emit(cfg, "mate-obstruction", args, compute), nl=False)


def _fsr_payload(cfg: Config, ta: Fraction, tb: Fraction, single_tree: str | None) -> str:
    m = _mating(cfg, ta, tb)
    if single_tree:
        complex_ = single_tree_skeleton(m, single_tree)
    else:
        complex_ = quotient_complex(
            m, build_tree(ta, m.dendrites[ALPHA]), build_tree(tb, m.dendrites[BETA])
        )
    pullback = pullback_complex(m, complex_)
    ok, emb = check_subdivision(complex_, pullback)
    if not ok:
        raise MatingError(f"pullback is not a subdivision: {emb.reason}")
    rule = extract_rule(complex_, pullback, emb)
    return dumps_canonical(
        {
            "spec": m.spec.to_json_dict(),
            "single_tree": single_tree,
            "complex": complex_.to_json_dict(),
            "pullback": pullback.to_json_dict(),
            "rule": rule.to_json_dict(),
        }
    )


@mate.command("fsr")
@click.argument("a")
@click.argument("b")
@click.option("--single-tree", type=click.Choice([ALPHA, BETA]), default=None)
@click.pass_obj
def mate_fsr(cfg: Config, a, b, single_tree):
    """Essential-type subdivision rule (two-tree, or one-tree with --single-tree)."""
    ta, tb = _parse_angle(a), _parse_angle(b)
    args = {
        "a": A.format_angle(ta),
        "b": A.format_angle(tb),
        "single_tree": single_tree,
        "depth": cfg.depth_bound,
    }
    click.echo(_emit(cfg, "mate-fsr", args, lambda: _fsr_payload(cfg, ta, tb, single_tree)), nl=False)


@mate.command("pseudo-equator")
@click.argument("a")
@click.argument("b")
@click.pass_obj
def mate_pseudo_equator(cfg: Config, a, b):
    """Equator curve, edge replacement matrix, and recovered angle pair."""
    ta, tb = _parse_angle(a), _parse_angle(b)
    m = _mating(cfg, ta, tb)
    complex_ = quotient_complex(
        m, build_tree(ta, m.dendrites[ALPHA]), build_tree(tb, m.dendrites[BETA])
    )
    outcome = decompose(m, complex_)
    if isinstance(outcome, PinchReport):
        click.echo(to_json(outcome), nl=False)
        sys.exit(EXIT_PINCHED)
    curve, lifted, matrix, result = outcome
    payload = dumps_canonical(
        {
            "curve": curve.to_json_dict(),
            "lifted": lifted.to_json_dict(),
            "matrix": [list(r) for r in matrix],
            "decomposition": result.to_json_dict(),
        }
    )
    click.echo(payload, nl=False)


@cli.group()
def rule():
    """Extracted-rule operations."""


def _rule_for(cfg: Config, ta: Fraction, tb: Fraction, single_tree: str | None):
    m = _mating(cfg, ta, tb)
    if single_tree:
        complex_ = single_tree_skeleton(m, single_tree)
    else:
        complex_ = quotient_complex(
            m, build_tree(ta, m.dendrites[ALPHA]), build_tree(tb, m.dendrites[BETA])
        )
    pullback = pullback_complex(m, complex_)
    ok, emb = check_subdivision(complex_, pullback)
    if not ok:
        raise MatingError(f"pullback is not a subdivision: {emb.reason}")
    return extract_rule(complex_, pullback, emb)


@rule.command("iterate")
@click.argument("a")
@click.argument("b")
@click.option("--levels", type=int, required=True)
@click.option("--single-tree", type=click.Choice([ALPHA, BETA]), default=None)
@click.pass_obj
def rule_iterate(cfg: Config, a, b, levels, single_tree):
    """Tile census per level, with explicit complexes up to the expansion bound."""
    ta, tb = _parse_angle(a), _parse_angle(b)

    def compute():
        r = _rule_for(cfg, ta, tb, single_tree)
        censuses, complexes = iterate_rule(r, levels, cfg.expansion_bound)
        return dumps_canonical(
            {
                "types": list(r.tile_names),
                "censuses": [list(c) for c in censuses],
                "complexes": [x.to_json_dict() for x in complexes],
            }
        )

    args = {
        "a": A.format_angle(ta),
        "b": A.format_angle(tb),
        "levels": levels,
        "single_tree": single_tree,
        "expansion_bound": cfg.expansion_bound,
    }
    click.echo(_emit(cfg, "rule-iterate", args, compute), nl=False)


@cli.command("render")
@click.argument("a")
@click.argument("b", required=False)
@click.option("--format", "fmt", type=click.Choice(["json", "dot", "svg"]), required=True)
@click.option(
    "--target",
    type=click.Choice(["tree", "partition", "complex", "rule", "equator", "decomposition"]),
    required=True,
)
@click.option("--level", type=int, default=0, show_default=True)
@click.option("--single-tree", type=click.Choice([ALPHA, BETA]), default=None)
@click.pass_obj
def render_cmd(cfg: Config, a, b, fmt, target, level, single_tree):
    """Render an artifact deterministically (JSON is the normative format)."""
    ta = _parse_angle(a)
    if target == "tree":
        tree = build_tree(ta)
        out = {"json": to_json, "dot": tree_to_dot, "svg": tree_to_svg}[fmt](tree)
        click.echo(out, nl=False)
        return
    if b is None:
        raise click.UsageError(f"target {target} needs two angles")
    tb = _parse_angle(b)
    m = _mating(cfg, ta, tb)
    if target == "partition":
        if fmt != "json":
            raise click.UsageError("partitions render as json only")
        click.echo(to_json(m.essential_partition()), nl=False)
        return
    if target == "complex":
        if level > cfg.expansion_bound:
            raise LevelTooDeep(f"level {level} exceeds bound {cfg.expansion_bound}")
        if level == 0:
            if single_tree:
                complex_ = single_tree_skeleton(m, single_tree)
            else:
                complex_ = quotient_complex(
                    m, build_tree(ta, m.dendrites[ALPHA]), build_tree(tb, m.dendrites[BETA])
                )
            out = {"json": to_json, "dot": complex_to_dot, "svg": complex_to_svg}[fmt](complex_)
        else:
            r = _rule_for(cfg, ta, tb, single_tree)
            x = expanded_complex_at_level(r, level, cfg.expansion_bound)
            out = {"json": to_json, "dot": expanded_to_dot, "svg": expanded_to_svg}[fmt](x)
        click.echo(out, nl=False)
        return
    if target == "rule":
        r = _rule_for(cfg, ta, tb, single_tree)
        if fmt == "json":
            click.echo(to_json(r), nl=False)
        elif fmt == "dot":
            lines = ["digraph rule {"]
            for i, name in enumerate(r.tile_names):
                lines.append(f'  t{i} [label="{name}"];')
            for i in range(len(r.tile_names)):
                for j in range(len(r.tile_names)):
                    if r.matrix[i][j]:
                        lines.append(f'  t{i} -> t{j} [label="{r.matrix[i][j]}"];')
            lines.append("}")
            click.echo("\n".join(lines) + "\n", nl=False)
        else:
            raise click.UsageError("rules render as json or dot")
        return
    # equator / decomposition
    complex_ = quotient_complex(
        m, build_tree(ta, m.dendrites[ALPHA]), build_tree(tb, m.dendrites[BETA])
    )
    outcome = decompose(m, complex_)
    if isinstance(outcome, PinchReport):
        click.echo(to_json(outcome), nl=False)
        sys.exit(EXIT_PINCHED)
    curve, lifted, matrix, result = outcome
    if fmt != "json":
        raise click.UsageError(f"target {target} renders as json only")
    if target == "equator":
        click.echo(
            dumps_canonical(
                {"curve": curve.to_json_dict(), "lifted": lifted.to_json_dict(), "matrix": [list(r_) for r_ in matrix]}
            ),
            nl=False,
        )
    else:
        click.echo(to_json(result), nl=False)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except SystemExit as exc:  # raised by sys.exit for pinched outcomes
        return int(exc.code or 0)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except InvalidMating as exc:
        click.echo(dumps_canonical({"error": "InvalidMating", "reason": exc.reason, "detail": exc.detail}), err=True, nl=False)
        return EXIT_INVALID
    except ObstructedMating as exc:
        payload = {"error": "ObstructedMating"}
        if exc.report is not None:
            payload["report"] = exc.report.to_json_dict()
        click.echo(dumps_canonical(payload), nl=False)
        return EXIT_OBSTRUCTED
    except (LimbNotFound, DepthExceeded, ClosureDepthExceeded, RepairFailed, LevelTooDeep) as exc:
        click.echo(f"bound exceeded: {exc}", err=True)
        return EXIT_BOUND
    except MatingError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
