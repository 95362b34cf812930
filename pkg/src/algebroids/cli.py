"""Command line front end.

Subcommands: verify (run a ladder, print tables and residual summary),
table (structure maps only), residuals (every residual, no tier gating),
search (grid search over declared unknowns), oracle (numeric cross-check
of the symbolic residuals at random rational points, or evaluation at a
chosen value of t).
"""

from __future__ import annotations

import argparse
import hashlib
import random
import sys
from fractions import Fraction

from . import __version__, formats, search
from .expr import JET_CAP, JET_NAMES, MissingAssignment, PoleError
from .formats import FileFormatError

_SAMPLE_NUM = 9  # numerators drawn from -9..9, denominators from 1..9


# ---------------------------------------------------------------------------
# rendering helpers


def _wrap(s: str) -> str:
    """Parenthesize when a top-level + or - occurs past the first char."""
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif i > 0 and depth == 0 and ch in "+-":
            return "(" + s + ")"
    return s


def _term(coeff: str, label: str) -> str:
    if coeff == "1":
        return label
    if coeff == "-1":
        return "-" + label
    return _wrap(coeff) + "*" + label


def _combo(coeffs, labels) -> str:
    parts = []
    for c, label in zip(coeffs, labels):
        if c == "0":
            continue
        parts.append(_term(c, label))
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def _anchor_line(label: str, coeff: str) -> str:
    if coeff == "0":
        return "a(%s) = 0" % label
    if coeff == "1":
        return "a(%s) = d/dt" % label
    return "a(%s) = %s*d/dt" % (label, _wrap(coeff))


def _lie_table_lines(tables, labels):
    lines = []
    m = len(tables["anchor"])
    for p in range(m):
        lines.append(_anchor_line(labels[p], tables["anchor"][p]))
    bracket = tables["bracket"]
    for p in range(m):
        for q in range(p + 1, m):
            lines.append(
                "[%s,%s] = %s"
                % (labels[p], labels[q], _combo(bracket[p][q], labels))
            )
    return lines


def _metric_table_lines(tables, labels):
    lines = []
    m = len(tables["anchor"])
    for p in range(m):
        lines.append(_anchor_line(labels[p], tables["anchor"][p]))
    dorfman = tables["dorfman"]
    for p in range(m):
        for q in range(m):
            lines.append(
                "%s o %s = %s"
                % (labels[p], labels[q], _combo(dorfman[p][q], labels))
            )
    lines.append("D(t) = %s" % _combo(tables["coderivative_t"], labels))
    return lines


def _table_lines(outcome, loaded):
    labels = list(loaded.frame_labels)
    lines = []
    tables = outcome.tables
    if outcome.kind == "lie":
        lines.extend(_lie_table_lines(tables, labels))
        pair = tables.get("lie_pair")
        if pair:
            dim = len(pair["basis"])
            slabels = ["s%d" % (a + 1) for a in range(dim)]
            lines.append("split at k=%d:" % pair["k"])
            for a in range(dim):
                lines.append(
                    "%s = %s" % (slabels[a], _combo(pair["basis"][a], labels))
                )
            for a in range(dim):
                lines.append(_anchor_line(slabels[a], pair["anchor"][a]))
            for a in range(dim):
                for b in range(a + 1, dim):
                    lines.append(
                        "[%s,%s] = %s"
                        % (slabels[a], slabels[b], _combo(pair["bracket"][a][b], slabels))
                    )
    elif outcome.kind == "bialgebroid":
        block_labels = labels[: len(labels) // 2]
        dual_labels = labels[len(labels) // 2 :]
        lines.append("primal block:")
        lines.extend(_lie_table_lines(tables["primal"], block_labels))
        lines.append("dual block:")
        lines.extend(_lie_table_lines(tables["dual"], dual_labels))
        if "assembled" in tables:
            lines.append("assembled:")
            lines.extend(_metric_table_lines(tables["assembled"], labels))
    else:
        lines.extend(_metric_table_lines(tables, labels))
        pair = tables.get("maximal")
        if pair:
            k = len(pair["basis"])
            llabels = ["l%d" % (a + 1) for a in range(k)]
            lines.append("maximal isotropic basis:")
            for a in range(k):
                lines.append(
                    "%s = %s" % (llabels[a], _combo(pair["basis"][a], labels))
                )
            lines.append("quotient classes: %s" % ", ".join(pair["classes"]))
            for a in range(k):
                lines.append(_anchor_line(llabels[a], pair["anchor"][a]))
            for a in range(k):
                for b in range(k):
                    lines.append(
                        "%s o %s = %s"
                        % (llabels[a], llabels[b], _combo(pair["bracket"][a][b], llabels))
                    )
    return lines


# ---------------------------------------------------------------------------
# argument plumbing


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(
            "expected name=value, got %r" % text
        )
    try:
        return name, int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "binding %r must be an integer" % value
        )


def _parser():
    parser = argparse.ArgumentParser(
        prog="algebroids",
        description="verify bracket and product structures defined in JSON "
        "system files",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("file", help="system file (JSON)")
        p.add_argument(
            "--param",
            action="append",
            type=_param,
            default=[],
            metavar="NAME=INT",
            help="bind an integer parameter (overrides the file's bindings)",
        )

    p = sub.add_parser("verify", help="run the verification ladder")
    add_common(p)
    p.add_argument("--level", help="tier to require (default: kind's top tier)")
    p.add_argument("--json", metavar="OUT", help="write a machine report")

    p = sub.add_parser("table", help="print the structure maps only")
    add_common(p)

    p = sub.add_parser("residuals", help="print every residual, no tier gating")
    add_common(p)

    p = sub.add_parser("search", help="grid search over declared unknowns")
    p.add_argument("template", help="system file with an unknowns list")
    p.add_argument("grid", help="grid file: unknown name -> list of rationals")
    p.add_argument(
        "--param",
        action="append",
        type=_param,
        default=[],
        metavar="NAME=INT",
        help="bind an integer parameter (overrides the file's bindings)",
    )
    p.add_argument("--json", metavar="OUT", help="write a machine report")

    p = sub.add_parser("oracle", help="numeric cross-check of the residuals")
    add_common(p)
    p.add_argument("--samples", type=int, default=25, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument(
        "--at",
        metavar="T",
        help="evaluate every residual at t=T with each indeterminate "
        "instantiated as the function t",
    )
    return parser


def _load(args):
    return formats.load_system(args.file, extra_bindings=dict(args.param))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_verify(args):
    try:
        loaded = _load(args)
        level = args.level or formats.LEVELS[loaded.kind][-1]
        outcome = formats.verify_loaded(loaded, level)
    except (FileFormatError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print("input: %s" % (loaded.path or "<memory>"))
    print("kind: %s" % outcome.kind)
    print("level: %s" % outcome.level)
    print("tier: %s" % outcome.tier)
    print("ok: %s" % ("yes" if outcome.ok else "no"))
    for message in outcome.errors:
        print("error: %s" % message)
    print()
    for line in _table_lines(outcome, loaded):
        print(line)
    print()
    failing = outcome.report.failing()
    if failing:
        print("failing residuals (%d of %d):" % (len(failing), len(outcome.report)))
        for label, value in outcome.report:
            if not value.is_zero:
                print("  %s: %s" % (label, value))
    else:
        print("residuals: %d checked, all zero" % len(outcome.report))
    if args.json:
        report = formats.machine_report(outcome, loaded)
        with open(args.json, "w") as fh:
            fh.write(formats.dump_report(report))
    return 0 if outcome.ok else 1


def _cmd_table(args):
    try:
        loaded = _load(args)
        outcome = formats.verify_loaded(loaded, formats.LEVELS[loaded.kind][0])
    except (FileFormatError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    for message in outcome.errors:
        print("error: %s" % message)
    for line in _table_lines(outcome, loaded):
        print(line)
    return 0


def _cmd_residuals(args):
    try:
        loaded = _load(args)
        outcome = formats.verify_loaded(loaded, formats.LEVELS[loaded.kind][0])
    except (FileFormatError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    for message in outcome.errors:
        print("error: %s" % message)
    for label, value in outcome.report:
        print("%s = %s" % (label, value))
    print(
        "total %d, nonzero %d"
        % (len(outcome.report), len(outcome.report.failing()))
    )
    return 0


def _cmd_search(args):
    try:
        loaded = formats.load_system(args.template, extra_bindings=dict(args.param))
        grid = formats.load_grid(args.grid)
        tmpl = formats.make_template(loaded, grid)
    except (FileFormatError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    try:
        outcome = search.grid_search(tmpl)
    except search.GridCapExceeded as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    level = formats.LEVELS[loaded.kind][-1]
    accepted = []
    for sol in outcome.solutions:
        tier = search.verify_assignment(tmpl, sol)
        tier = tier.lower().replace("_", "-")
        accepted.append((sol, tier))
    print("template: %s" % args.template)
    print("grid: %s" % args.grid)
    print("unknowns: %s" % ", ".join(tmpl.unknowns))
    print(
        "checked %d points, skipped %d boundary points, accepted %d"
        % (outcome.total, outcome.skipped, len(accepted))
    )
    for sol, tier in accepted:
        pairs = ", ".join("%s=%s" % (n, sol[n]) for n in tmpl.unknowns)
        print("accepted: %s (re-verified: %s)" % (pairs, tier))
    if args.json:
        report = {
            "tool": "algebroids",
            "version": __version__,
            "template": args.template,
            "grid": args.grid,
            "sha256": {
                "template": loaded.sha256,
                "grid": _file_digest(args.grid),
            },
            "unknowns": list(tmpl.unknowns),
            "level": level,
            "total": outcome.total,
            "skipped": outcome.skipped,
            "accepted": [
                {
                    "assignment": {n: str(sol[n]) for n in tmpl.unknowns},
                    "tier": tier,
                    "ok": tier == level,
                }
                for sol, tier in accepted
            ],
        }
        with open(args.json, "w") as fh:
            fh.write(formats.dump_report(report))
    return 0


def _file_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _jet_point(base, first):
    point = {}
    for name in JET_NAMES:
        point[name] = base
        for order in range(1, JET_CAP + 1):
            point[name + "'" * order] = first if order == 1 else Fraction(0)
    return point


def _cmd_oracle(args):
    try:
        loaded = _load(args)
        outcome = formats.verify_loaded(loaded, formats.LEVELS[loaded.kind][0])
    except (FileFormatError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    if outcome.errors and not len(outcome.report):
        for message in outcome.errors:
            print("error: %s" % message, file=sys.stderr)
        return 2
    entries = list(outcome.report)
    env = loaded.env

    if args.at is not None:
        try:
            at = Fraction(args.at)
        except (ValueError, ZeroDivisionError):
            print("error: --at expects a rational number", file=sys.stderr)
            return 2
        point = {"t": at}
        # indeterminates become the function f(t) = t: value t, slope 1
        point.update(_jet_point(at, Fraction(1)))
        for label, value in entries:
            try:
                print("%s = %s" % (label, value.eval_at(point)))
            except PoleError:
                print("%s = pole" % label)
            except MissingAssignment as exc:
                print(
                    "error: %s; bind integer parameters with --param" % exc,
                    file=sys.stderr,
                )
                return 2
        return 0

    if args.samples < 1:
        print("error: --samples must be at least 1", file=sys.stderr)
        return 2
    rng = random.Random(args.seed)
    excluded = [env.parse(s) for s in env.excluded]
    nonzero_seen = [False] * len(entries)
    done = 0
    attempts = 0
    while done < args.samples:
        attempts += 1
        if attempts > 200 * args.samples:
            print("error: could not draw enough pole-free points", file=sys.stderr)
            return 2
        point = _draw_point(rng, env)
        try:
            if any(e.eval_at(point) == 0 for e in excluded):
                continue
            hits = [
                i
                for i, (_label, value) in enumerate(entries)
                if not nonzero_seen[i] and value.eval_at(point) != 0
            ]
        except PoleError:
            continue
        for i in hits:
            nonzero_seen[i] = True
        done += 1
    disagreements = []
    for i, (label, value) in enumerate(entries):
        if value.is_zero and nonzero_seen[i]:
            disagreements.append((label, "symbolic zero, numeric nonzero"))
        elif not value.is_zero and not nonzero_seen[i]:
            disagreements.append((label, "symbolic nonzero, numeric zero"))
    for label, what in disagreements:
        print("disagree: %s (%s)" % (label, what))
    print(
        "oracle: %d residuals, %d samples, %d disagreements"
        % (len(entries), args.samples, len(disagreements))
    )
    return 1 if disagreements else 0


def _draw_point(rng, env):
    point = {}
    for name in ["t"] + list(env.params):
        point[name] = Fraction(
            rng.randint(-_SAMPLE_NUM, _SAMPLE_NUM), rng.randint(1, _SAMPLE_NUM)
        )
    for jet in JET_NAMES:
        for order in range(JET_CAP + 1):
            point[jet + "'" * order] = Fraction(
                rng.randint(-_SAMPLE_NUM, _SAMPLE_NUM),
                rng.randint(1, _SAMPLE_NUM),
            )
    return point


_HANDLERS = {
    "verify": _cmd_verify,
    "table": _cmd_table,
    "residuals": _cmd_residuals,
    "search": _cmd_search,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return _HANDLERS[args.command](args)
    except RuntimeError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
