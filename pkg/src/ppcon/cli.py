"""Command line entry point ``ppcon``.

Exit codes: 0 success or "yes", 1 a definite mathematical "no", 2 usage
errors and exhausted budgets.
"""

from __future__ import annotations

import argparse
import io
import sys
from contextlib import redirect_stdout
from dataclasses import dataclass, field
from pathlib import Path

from . import catalog
from .conditions import criterion_witness, find_polymorphism, fs_spectrum, parse_condition
from .dot import export_dot
from .errors import BudgetExceeded
from .forge import BOOLEAN_MAJORITY, XOR3, pipeline
from .perm import is_simple, maximal_subgroups, prim_action
from .pplab import reduce_to_simple
from .structures import (connected_components, dual_pairing, find_homomorphism,
                         structure_of_action)

OK, NO, ERROR = 0, 1, 2


@dataclass
class CommandResult:
    exit_code: int
    report: str
    artifacts: list[Path] = field(default_factory=list)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS,
                        help="cap for enumerations and searches")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="accepted for interface stability; computations are single threaded")
    p = _Parser(prog="ppcon", description="pp-constructability toolkit", parents=[common])
    sub = p.add_subparsers(dest="area", required=True, parser_class=_Parser)

    def leaf(group, name):
        return group.add_parser(name, parents=[common])

    g = sub.add_parser("group").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    info = leaf(g, "info")
    info.add_argument("spec")
    prim = leaf(g, "prim")
    prim.add_argument("spec")
    prim.add_argument("--dot")
    prim.add_argument("--json")

    s = sub.add_parser("structure").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    comp = leaf(s, "components")
    comp.add_argument("file")
    hom = leaf(s, "hom")
    hom.add_argument("a")
    hom.add_argument("b")

    c = sub.add_parser("cond").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    check = leaf(c, "check")
    check.add_argument("--structure", required=True)
    check.add_argument("--cond", required=True)
    crit = leaf(c, "criterion")
    crit.add_argument("--g", required=True, help="action spec, e.g. A5:prim")
    crit.add_argument("--h", required=True, help="action spec, e.g. Z5:regular")
    spec = leaf(c, "fs-spectrum")
    spec.add_argument("spec")
    spec.add_argument("--upto", type=int, default=25)

    f = sub.add_parser("forge").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    pipe = leaf(f, "pipeline")
    pipe.add_argument("--domain", type=int, default=2)
    pipe.add_argument("--max", type=int, default=5, dest="n_max")
    pipe.add_argument("--report")

    r = leaf(sub, "reduce")
    r.add_argument("--action", required=True, help="action spec or group file (natural action)")
    return p


def _budget(args, default: int) -> int:
    budget = getattr(args, "budget", None)
    if budget is not None and budget < 1:
        raise UsageError("--budget must be positive")
    return budget if budget is not None else default


def _group_info(args) -> CommandResult:
    grp = catalog.group(args.spec)
    lines = [f"group {grp.name or args.spec}", f"degree {grp.degree}", f"order {grp.order}",
             f"simple {'yes' if is_simple(grp) else 'no'}"]
    if grp.order > 1:
        lines.append("maximal subgroup classes (order, class size, generators):")
        for c in maximal_subgroups(grp):
            gens = " ".join(p.to_cycles() for p in c.representative.generators)
            lines.append(f"  {c.order} {c.class_size} {gens}")
    return CommandResult(OK, "\n".join(lines) + "\n")


def _group_prim(args) -> CommandResult:
    grp = catalog.group(args.spec)
    act = prim_action(grp)
    struct = structure_of_action(act)
    comps = connected_components(struct)
    lines = [f"group {grp.name or args.spec} order {grp.order}",
             "maximal classes: " + " ".join(str(c.order) for c in maximal_subgroups(grp)),
             f"points {act.points}",
             "components " + " ".join(str(len(c)) for c in comps)]
    for name, img in zip(struct.relations, act.generator_images):
        lines.append(f"{name} = {img.to_cycles()}")
    arts = []
    if args.json:
        Path(args.json).write_text(struct.to_json())
        arts.append(Path(args.json))
    if args.dot:
        arts.append(export_dot(struct, args.dot))
    return CommandResult(OK, "\n".join(lines) + "\n", arts)


def _structure_components(args) -> CommandResult:
    st = catalog.structure(args.file)
    comps = connected_components(st)
    lines = [f"domain {st.domain_size}", f"components {len(comps)}"]
    binary = all(a == 2 for a, _ in st.relations.values())
    pairing = dual_pairing(st) if binary else {}
    for i, c in enumerate(comps):
        extra = ""
        if binary:
            j = pairing[i]
            extra = f" dual {'none' if j is None else j}"
        lines.append(f"  [{i}] size {len(c)}{extra}: " + " ".join(map(str, c)))
    return CommandResult(OK, "\n".join(lines) + "\n")


def _structure_hom(args) -> CommandResult:
    a, b = catalog.structure(args.a), catalog.structure(args.b)
    h = find_homomorphism(a, b, _budget(args, 10**7))
    if h is None:
        return CommandResult(NO, "no homomorphism\n")
    return CommandResult(OK, "homomorphism " + " ".join(map(str, h.map)) + "\n")


def _cond_check(args) -> CommandResult:
    st = catalog.structure(args.structure)
    cond = parse_condition(args.cond)
    sol = find_polymorphism(st, cond, _budget(args, 10**8))
    if sol is None:
        return CommandResult(NO, f"no {cond.label} polymorphism\n")
    lines = [f"{cond.label} polymorphism found"]
    for sym, op in sol.items():
        lines.append(f"{sym}: " + " ".join(map(str, op.table.tolist())))
    return CommandResult(OK, "\n".join(lines) + "\n")


def _cond_criterion(args) -> CommandResult:
    g, h = catalog.action(args.g), catalog.action(args.h)
    t = criterion_witness(g, h, _budget(args, 10**8))
    if t is None:
        return CommandResult(OK, "satisfied: every stabilizer of an orbit fixes a point\n")
    return CommandResult(NO, "not satisfied: witness t = " + " ".join(map(str, t)) + "\n")


def _cond_spectrum(args) -> CommandResult:
    spec = fs_spectrum(catalog.group(args.spec), args.upto)
    lines = ["component sizes " + " ".join(map(str, spec.component_sizes)),
             f"failing arities up to {args.upto}: " + ",".join(map(str, spec.failing)),
             f"smallest failing arity {spec.smallest_failing}",
             f"largest maximal-subgroup index {spec.largest_maximal_index}",
             f"pattern {spec.describe()}"]
    return CommandResult(OK, "\n".join(lines) + "\n")


def _forge_pipeline(args) -> CommandResult:
    if args.domain != 2:
        raise UsageError("forge pipeline: only --domain 2 is supported")
    rep = pipeline(BOOLEAN_MAJORITY, XOR3, args.n_max)
    text = rep.text()
    arts = []
    if args.report:
        Path(args.report).write_text(text)
        arts.append(Path(args.report))
    return CommandResult(OK if rep.failures == 0 else NO, text, arts)


def _reduce(args) -> CommandResult:
    res = reduce_to_simple(catalog.action(args.action))
    return CommandResult(OK, res.text())


_HANDLERS = {
    ("group", "info"): _group_info,
    ("group", "prim"): _group_prim,
    ("structure", "components"): _structure_components,
    ("structure", "hom"): _structure_hom,
    ("cond", "check"): _cond_check,
    ("cond", "criterion"): _cond_criterion,
    ("cond", "fs-spectrum"): _cond_spectrum,
    ("forge", "pipeline"): _forge_pipeline,
    ("reduce", None): _reduce,
}


def run(argv) -> CommandResult:
    buf = io.StringIO()
    try:
        with redirect_stdout(buf):
            args = _parser().parse_args(list(argv))
    except UsageError as exc:
        return CommandResult(ERROR, f"error: {exc}\n")
    except SystemExit as exc:  # --help
        return CommandResult(OK if not exc.code else ERROR, buf.getvalue())
    handler = _HANDLERS[(args.area, getattr(args, "cmd", None))]
    try:
        return handler(args)
    except BudgetExceeded as exc:
        return CommandResult(ERROR, f"error: {exc}\n")
    except (UsageError, ValueError, OSError) as exc:
        return CommandResult(ERROR, f"error: {exc}\n")


def main(argv=None) -> int:
    res = run(sys.argv[1:] if argv is None else argv)
    stream = sys.stdout if res.exit_code != ERROR else sys.stderr
    stream.write(res.report)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
