"""Exhaustive grid search for parameter values satisfying all residuals.

A template is a system whose environment carries free parameters marked
as unknowns.  The residuals of the relevant verification families are
collected once as polynomial numerators; a grid assigns each unknown a
finite list of exact rationals, and every point of the product grid is
tested by substitution.  Points where a side condition (an excluded
expression or a residual denominator) collapses to zero are skipped as
boundary points rather than reported as solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import courant, expr, lie
from .bundles import CDO

GRID_CAP = 10 ** 6


class GridCapExceeded(ValueError):
    """The product grid is larger than GRID_CAP points."""


@dataclass(frozen=True)
class Template:
    """A system with designated unknown parameters and their value grid."""

    system: object
    unknowns: tuple
    grid: dict
    side_conditions: tuple = ()

    def __post_init__(self):
        env = self.system.env
        for name in self.unknowns:
            if name not in env.params:
                raise ValueError(
                    "unknown %r is not a parameter of the environment" % (name,)
                )


@dataclass(frozen=True)
class SearchOutcome:
    total: int
    skipped: int
    solutions: tuple
    labels: tuple = field(default=(), compare=False)


def _residual_entries(system):
    """(label, Expr) residual pairs for the system's verification ladder."""
    entries = []
    if isinstance(system, courant.MetricNSystem):
        for label, value in courant.metric_compat_residuals(system):
            entries.append((label, value))
        _tier, report = courant.check_axioms(system)
        for label, value in report:
            entries.append((label, value))
    elif isinstance(system, lie.NSystem):
        for label, value in lie.compat_residuals(system):
            entries.append((label, value))
        _tier, report = lie.classify(system)
        for label, value in report:
            entries.append((label, value))
    else:
        raise TypeError("unsupported system type %r" % type(system).__name__)
    return entries


def residual_system(tmpl: Template):
    """Polynomial residual numerators with unknowns left symbolic."""
    _labels, numerators, _sides = residual_details(tmpl)
    return list(numerators)


def residual_details(tmpl: Template):
    """Labelled residual numerators and the active side conditions.

    Returns (labels, numerators, side_conditions).  Denominators of the
    residuals join the side conditions automatically, as do the
    environment's excluded expressions.
    """
    env = tmpl.system.env
    sides = [env.parse(s) for s in env.excluded]
    sides.extend(tmpl.side_conditions)
    labels = []
    numerators = []
    for label, value in _residual_entries(tmpl.system):
        labels.append(label)
        numerators.append(expr.numerator(value))
        den = expr.denominator(value)
        if den.free_names() and not any(den == s for s in sides):
            sides.append(den)
    return tuple(labels), tuple(numerators), tuple(sides)


def grid_size(tmpl: Template) -> int:
    """Number of grid points; an unknown with no listed values empties it."""
    total = 1
    for name in tmpl.unknowns:
        total *= len(tmpl.grid.get(name, ()))
    return total


def grid_search(tmpl: Template) -> SearchOutcome:
    """Test every grid point; return solutions and the skip count.

    A point is a solution when every residual numerator substitutes to
    zero.  A point is skipped when some side condition substitutes to
    the zero expression, meaning the point sits on an excluded boundary
    of the family.
    """
    total = grid_size(tmpl)
    if total > GRID_CAP:
        raise GridCapExceeded(
            "grid has %d points, cap is %d" % (total, GRID_CAP)
        )
    labels, numerators, sides = residual_details(tmpl)
    names = tuple(tmpl.unknowns)
    axes = [
        tuple(Fraction(v) for v in tmpl.grid.get(name, ())) for name in names
    ]
    solutions = []
    skipped = 0
    for point in product(*axes):
        assignment = dict(zip(names, point))
        if any(s.substitute(assignment).is_zero for s in sides):
            skipped += 1
            continue
        if all(r.substitute(assignment).is_zero for r in numerators):
            solutions.append(dict(assignment))
    return SearchOutcome(
        total=total,
        skipped=skipped,
        solutions=tuple(solutions),
        labels=labels,
    )


def substitute_system(system, assignment):
    """Rebuild the system with rational values in place of some parameters."""
    env = system.env

    def sub(e):
        return e.substitute(assignment)

    def sub_op(op):
        return CDO(
            env, sub(op.symbol), [[sub(x) for x in row] for row in op.rows]
        )

    if isinstance(system, courant.MetricNSystem):
        return courant.MetricNSystem(
            [[sub(x) for x in row] for row in system.gram],
            [sub_op(op) for op in system.operators],
            [[sub(x) for x in v] for v in system.sections],
        )
    return lie.NSystem(
        [sub_op(op) for op in system.operators],
        [[sub(x) for x in v] for v in system.covectors],
    )


def verify_assignment(tmpl: Template, assignment) -> str:
    """Tier reached by the template's system at a concrete assignment."""
    system = substitute_system(tmpl.system, assignment)
    if isinstance(system, courant.MetricNSystem):
        tier, _report = courant.check_axioms(system)
    else:
        tier, _report = lie.classify(system)
    return tier
