"""Declarative system files, verification ladders and report assembly.

A system file is JSON with expression strings: a kind tag, a rank, the
operator list (each entry giving its symbol and exactly one of a primal
matrix or a dual-action matrix), the distinguished covectors or
sections, and for the richer kinds a pairing matrix, an isotropic basis
or two embedded blocks.  Integer parameters may be bound in the file's
"bindings" block or overridden by the caller.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import courant, derived, lie, search
from .bundles import CDO
from .expr import ExprSyntaxError, ParamEnv
from .report import ResidualReport

KINDS = ("lie", "metric", "bialgebroid", "manin")

LEVELS = {
    "lie": ("pure", "dull", "lie"),
    "metric": ("metric", "pre-courant", "courant"),
    "bialgebroid": ("metric", "pre-courant", "courant", "bialgebroid"),
    "manin": ("metric", "pre-courant", "courant", "manin"),
}

# residual label family -> rung index in the three-step base ladder.
# The tier is decided by the axioms that define each rung; the remaining
# families are sufficient-condition diagnostics (the span expansions,
# bracket closures, and section isotropy) that are reported but marked
# None so they never gate a rung.  A system whose constructed bracket
# satisfies every axiom of a rung reaches it even when those certificates
# fail.
_RUNGS = {
    "lie": {
        "span": None,
        "symbol-bracket": None,
        "operator-bracket": None,
        "anchor-hom": 1,
        "jacobi": 2,
    },
    "metric": {
        "pairing": 0,
        "section-span": None,
        "symbol-bracket": None,
        "operator-bracket": None,
        "isotropy": None,
        "invariance": 0,
        "square": 0,
        "square-gen": 0,
        "anchor-hom": 1,
        "Delta-term": 1,
        "leibniz": 2,
        # doubling conditions, reported only for the bialgebroid kind
        "cross-pairing": None,
        "mixed-symbol": None,
        "mixed-bracket": None,
    },
}


class FileFormatError(ValueError):
    """A system or grid file does not match the expected shape."""

    def __init__(self, message, where=""):
        self.where = where
        if where:
            message = "%s: %s" % (where, message)
        super().__init__(message)


class LoadedSystem:
    """A parsed system file together with its environment and metadata."""

    def __init__(self, kind, path, raw, env, sha256):
        self.kind = kind
        self.path = path
        self.raw = raw
        self.env = env
        self.sha256 = sha256
        self.system = None
        self.primal = None
        self.dual = None
        self.maximal = None
        self.lie_pair_k = None
        self.unknowns = ()
        self.side_conditions = ()

    @property
    def frame_labels(self):
        if self.kind == "bialgebroid":
            m = self.primal.m
            return tuple(
                ["w%d" % (p + 1) for p in range(m)]
                + ["w^%d" % (p + 1) for p in range(m)]
            )
        return tuple("w%d" % (p + 1) for p in range(self.rank))

    @property
    def rank(self):
        if self.kind == "bialgebroid":
            return 2 * self.primal.m
        return self.system.m

    def __repr__(self):
        return "LoadedSystem(kind=%r, path=%r)" % (self.kind, self.path)


@dataclass
class Outcome:
    """Result of running a verification ladder on a loaded system."""

    kind: str
    level: str
    tier: str
    ok: bool
    report: ResidualReport
    tables: dict
    errors: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# loading


def _require(doc, key, where):
    if key not in doc:
        raise FileFormatError("missing required field %r" % key, where)
    return doc[key]


def _as_str_list(value, where):
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise FileFormatError("expected a list of strings", where)
    return value


def _parse_entry(env, text, where):
    if not isinstance(text, str):
        raise FileFormatError("expected an expression string", where)
    try:
        return env.parse(text)
    except ExprSyntaxError as exc:
        raise FileFormatError(str(exc), where)


def _parse_matrix(env, value, rows, cols, where):
    if not isinstance(value, list) or len(value) != rows:
        raise FileFormatError("expected %d rows" % rows, where)
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise FileFormatError(
                "expected %d entries" % cols, "%s[%d]" % (where, i)
            )
        out.append(
            [
                _parse_entry(env, cell, "%s[%d][%d]" % (where, i, j))
                for j, cell in enumerate(row)
            ]
        )
    return out


def _build_env(doc, extra_bindings, where):
    params = _as_str_list(doc.get("params", []), where + "params")
    bindings = doc.get("bindings", {})
    if not isinstance(bindings, dict):
        raise FileFormatError("expected an object", where + "bindings")
    merged = {}
    for name, value in bindings.items():
        if not isinstance(value, int) or isinstance(value, bool):
            raise FileFormatError(
                "binding %r must be an integer" % name, where + "bindings"
            )
        merged[name] = value
    for name, value in (extra_bindings or {}).items():
        merged[name] = value
    excluded = _as_str_list(doc.get("excluded", []), where + "excluded")
    try:
        env = ParamEnv(params, merged, tuple(excluded))
    except ValueError as exc:
        raise FileFormatError(str(exc), where.rstrip("."))
    for i, text in enumerate(excluded):
        e = _parse_entry(env, text, "%sexcluded[%d]" % (where, i))
        if e.is_zero:
            raise FileFormatError(
                "expression is identically zero under the current bindings",
                "%sexcluded[%d]" % (where, i),
            )
    return env


def _load_operator(env, doc, rank, where):
    if not isinstance(doc, dict):
        raise FileFormatError("expected an object", where)
    symbol = _parse_entry(env, _require(doc, "symbol", where), where + ".symbol")
    has_primal = "matrix" in doc
    has_dual = "dual_matrix" in doc
    if has_primal == has_dual:
        raise FileFormatError(
            "exactly one of 'matrix' and 'dual_matrix' is required", where
        )
    if has_primal:
        rows = _parse_matrix(env, doc["matrix"], rank, rank, where + ".matrix")
        return CDO(env, symbol, rows)
    rows = _parse_matrix(
        env, doc["dual_matrix"], rank, rank, where + ".dual_matrix"
    )
    return CDO.from_dual(env, symbol, rows)


def _load_block(env, doc, rank, where):
    """Operators plus covectors of one lie block; returns an NSystem."""
    ops_doc = _require(doc, "operators", where)
    if not isinstance(ops_doc, list) or not ops_doc:
        raise FileFormatError("expected a nonempty list", where + "operators")
    ops = [
        _load_operator(env, op, rank, "%soperators[%d]" % (where, i))
        for i, op in enumerate(ops_doc)
    ]
    cov_doc = _require(doc, "covectors", where)
    covs = _parse_matrix(env, cov_doc, len(ops), rank, where + "covectors")
    try:
        return lie.NSystem(ops, covs)
    except ValueError as exc:
        raise FileFormatError(str(exc), where.rstrip("."))


def load_system(source, extra_bindings=None) -> LoadedSystem:
    """Load a system file (path or already-decoded dict).

    extra_bindings maps integer parameter names to values and overrides
    the file's own bindings block.  Raises FileFormatError on any shape,
    parse or validation problem.
    """
    if isinstance(source, dict):
        raw = source
        path = ""
        blob = json.dumps(source, sort_keys=True).encode()
    else:
        path = os.fspath(source)
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise FileFormatError(str(exc))
        try:
            raw = json.loads(blob.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FileFormatError("not valid JSON (%s)" % exc)
    if not isinstance(raw, dict):
        raise FileFormatError("top level must be an object")
    kind = _require(raw, "kind", "")
    if kind not in KINDS:
        raise FileFormatError(
            "unknown kind %r, expected one of %s" % (kind, ", ".join(KINDS)),
            "kind",
        )
    rank = _require(raw, "rank", "")
    if not isinstance(rank, int) or rank < 1:
        raise FileFormatError("rank must be a positive integer", "rank")
    env = _build_env(raw, extra_bindings, "")
    digest = hashlib.sha256(blob).hexdigest()
    loaded = LoadedSystem(kind, path, raw, env, digest)

    if kind == "lie":
        loaded.system = _load_block(env, raw, rank, "")
        k = raw.get("lie_pair_k")
        if k is not None:
            if not isinstance(k, int) or k < 1:
                raise FileFormatError("must be a positive integer", "lie_pair_k")
            loaded.lie_pair_k = k
    elif kind in ("metric", "manin"):
        gram = _parse_matrix(env, _require(raw, "gram", ""), rank, rank, "gram")
        ops_doc = _require(raw, "operators", "")
        if not isinstance(ops_doc, list) or not ops_doc:
            raise FileFormatError("expected a nonempty list", "operators")
        ops = [
            _load_operator(env, op, rank, "operators[%d]" % i)
            for i, op in enumerate(ops_doc)
        ]
        sections = _parse_matrix(
            env, _require(raw, "sections", ""), len(ops), rank, "sections"
        )
        try:
            loaded.system = courant.MetricNSystem(gram, ops, sections)
        except ValueError as exc:
            raise FileFormatError(str(exc))
        if kind == "manin":
            l_doc = _require(raw, "L", "")
            if not isinstance(l_doc, list) or not l_doc:
                raise FileFormatError("expected a nonempty list of rows", "L")
            loaded.maximal = _parse_matrix(env, l_doc, len(l_doc), rank, "L")
    else:
        loaded.primal = _load_block(env, _require(raw, "primal", ""), rank, "primal.")
        loaded.dual = _load_block(env, _require(raw, "dual", ""), rank, "dual.")

    if "n" in raw:
        n = raw["n"]
        expected = loaded.primal.n if kind == "bialgebroid" else loaded.system.n
        if n != expected:
            raise FileFormatError(
                "declares n=%r but %d operators are present" % (n, expected), "n"
            )
    unknowns = raw.get("unknowns", [])
    _as_str_list(unknowns, "unknowns")
    for name in unknowns:
        if name not in env.params:
            raise FileFormatError(
                "unknown %r is not a declared parameter" % name, "unknowns"
            )
    loaded.unknowns = tuple(unknowns)
    sides = raw.get("side_conditions", [])
    _as_str_list(sides, "side_conditions")
    loaded.side_conditions = tuple(
        _parse_entry(env, s, "side_conditions[%d]" % i)
        for i, s in enumerate(sides)
    )
    return loaded


def load_grid(source) -> dict:
    """Load a grid file: an object mapping unknown names to rational lists."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            with open(os.fspath(source), "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise FileFormatError(str(exc))
        try:
            raw = json.loads(blob.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FileFormatError("not valid JSON (%s)" % exc)
    if not isinstance(raw, dict):
        raise FileFormatError("grid must be an object of value lists")
    out = {}
    for name, values in raw.items():
        if not isinstance(values, list):
            raise FileFormatError("expected a list", name)
        parsed = []
        for i, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, (int, str)):
                raise FileFormatError(
                    "grid values must be integers or rational strings",
                    "%s[%d]" % (name, i),
                )
            try:
                parsed.append(Fraction(v))
            except (ValueError, ZeroDivisionError) as exc:
                raise FileFormatError(str(exc), "%s[%d]" % (name, i))
        out[name] = tuple(parsed)
    return out


def make_template(loaded: LoadedSystem, grid) -> search.Template:
    if not loaded.unknowns:
        raise FileFormatError(
            "file declares no unknowns; nothing to search for", "unknowns"
        )
    return search.Template(
        system=loaded.system,
        unknowns=loaded.unknowns,
        grid=dict(grid),
        side_conditions=loaded.side_conditions,
    )


# ---------------------------------------------------------------------------
# verification ladders


def _tier_from_report(kind, report):
    rungs = _RUNGS["lie" if kind == "lie" else "metric"]
    ok = [True, True, True]
    for label, value in report:
        family = label.split("[")[0]
        idx = rungs[family]
        if idx is None:
            continue
        if ok[idx] and not value.is_zero:
            ok[idx] = False
    reached = -1
    for idx in range(3):
        if not ok[idx]:
            break
        reached = idx
    return reached


def _lie_tables(table):
    m = table.m
    return {
        "anchor": [str(c) for c in table.anchor_coeffs],
        "bracket": [
            [[str(c) for c in table.bracket_table[p][q]] for q in range(m)]
            for p in range(m)
        ],
    }


def _metric_tables(table):
    m = table.m
    env = table.env
    return {
        "anchor": [str(c) for c in table.anchor_coeffs],
        "dorfman": [
            [[str(c) for c in table.dorfman_table[p][q]] for q in range(m)]
            for p in range(m)
        ],
        "coderivative_t": [str(c) for c in table.dop(env.var("t"))],
    }


def verify_loaded(loaded: LoadedSystem, level: str) -> Outcome:
    """Run the verification ladder for the loaded system's kind.

    The report always contains every residual family, the gating axioms
    and the sufficient-condition diagnostics alike; the tier is the
    highest rung whose axiom families (and all below) vanish, with the
    derived rung (bialgebroid assembly, maximal isotropic splitting)
    granted only on top of a full base ladder.
    """
    kind = loaded.kind
    ladder = LEVELS[kind]
    if level not in ladder:
        raise ValueError(
            "level %r does not apply to kind %r (choose from %s)"
            % (level, kind, ", ".join(ladder))
        )
    report = ResidualReport()
    tables = {}
    errors = []

    if kind == "lie":
        sys_obj = loaded.system
        report.extend(lie.compat_residuals(sys_obj))
        _tier, cls = lie.classify(sys_obj)
        report.extend(cls)
        tables.update(_lie_tables(lie.build_structure(sys_obj)))
        reached = _tier_from_report(kind, report)
        if loaded.lie_pair_k is not None:
            if reached == 2:
                try:
                    pair = derived.lie_pair_extract(sys_obj, loaded.lie_pair_k)
                except ValueError as exc:
                    errors.append(str(exc))
                else:
                    dim = len(pair.basis)
                    tables["lie_pair"] = {
                        "k": pair.k,
                        "basis": [[str(c) for c in v] for v in pair.basis],
                        "anchor": [str(c) for c in pair.anchor_coeffs],
                        "bracket": [
                            [
                                [str(c) for c in pair.bracket_coords[a][b]]
                                for b in range(dim)
                            ]
                            for a in range(dim)
                        ],
                    }
            else:
                errors.append(
                    "split requested but the system does not reach lie"
                )
    elif kind in ("metric", "manin"):
        sys_obj = loaded.system
        report.extend(courant.metric_compat_residuals(sys_obj))
        _tier, ax = courant.check_axioms(sys_obj)
        report.extend(ax)
        tables.update(_metric_tables(courant.build_structure(sys_obj)))
        reached = _tier_from_report(kind, report)
        if kind == "manin":
            try:
                pair = derived.dirac_check(sys_obj, loaded.maximal)
            except ValueError as exc:
                errors.append(str(exc))
            else:
                k = pair.k
                tables["maximal"] = {
                    "basis": [[str(c) for c in v] for v in pair.basis],
                    "classes": pair.quotient_labels(),
                    "anchor": [str(c) for c in pair.anchor_coeffs],
                    "bracket": [
                        [
                            [str(c) for c in pair.bracket_coords[a][b]]
                            for b in range(k)
                        ]
                        for a in range(k)
                    ],
                }
                if reached == 2:
                    reached = 3
    else:
        assembled = None
        try:
            assembled, conditions = derived.bialgebroid_assemble(
                loaded.primal, loaded.dual
            )
        except ValueError as exc:
            errors.append(str(exc))
        tables["primal"] = _lie_tables(lie.build_structure(loaded.primal))
        tables["dual"] = _lie_tables(lie.build_structure(loaded.dual))
        if assembled is None:
            reached = -1
        else:
            loaded.system = assembled
            report.extend(courant.metric_compat_residuals(assembled))
            _tier, ax = courant.check_axioms(assembled)
            report.extend(ax)
            report.extend(conditions)
            tables["assembled"] = _metric_tables(courant.build_structure(assembled))
            reached = _tier_from_report(kind, report)
            # the doubling rung asks for the compatible (p+q)-system in
            # full: every diagnostic must vanish on top of the ladder
            if reached == 2 and all(v.is_zero for _label, v in report):
                reached = 3

    tier = "none" if reached < 0 else ladder[reached]
    ok = reached >= ladder.index(level) and not errors
    return Outcome(kind, level, tier, ok, report, tables, errors)


# ---------------------------------------------------------------------------
# machine reports


def machine_report(outcome: Outcome, loaded: LoadedSystem) -> dict:
    from . import __version__

    return {
        "tool": "algebroids",
        "version": __version__,
        "input": os.path.basename(loaded.path) if loaded.path else "<memory>",
        "sha256": loaded.sha256,
        "kind": outcome.kind,
        "level": outcome.level,
        "tier": outcome.tier,
        "ok": outcome.ok,
        "errors": list(outcome.errors),
        "residuals": [
            {"label": label, "expr": str(value), "zero": value.is_zero}
            for label, value in outcome.report
        ],
        "tables": outcome.tables,
    }


def dump_report(report: dict) -> str:
    """Deterministic serialization: byte-identical for identical inputs."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
