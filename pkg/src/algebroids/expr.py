"""Exact scalar arithmetic: rational functions of t, named constants, and jets.

Every scalar that the verification pipeline touches lives in the fraction
field QQ(t, params, jets), represented as a canonical numerator/denominator
pair of multivariate polynomials with exact rational coefficients.  Equality
and zero-testing are syntactic on the canonical form, never numeric.

Polynomial heavy lifting (add/mul/gcd/cancel/diff) is delegated to
sympy.polys.rings sparse polynomials over QQ; canonical form, ordering,
parsing, printing, substitution and evaluation are implemented here.
"""

from __future__ import annotations

from fractions import Fraction

from sympy import QQ
from sympy.polys.rings import ring as _sympy_ring


class ExprSyntaxError(ValueError):
    """Malformed expression text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class UndeclaredName(ExprSyntaxError):
    """Identifier not declared in the environment."""


class PoleError(ArithmeticError):
    """Denominator vanished at an evaluation point."""


class MissingAssignment(ValueError):
    """eval_at was handed a point that does not cover every variable."""


class JetCapError(ValueError):
    """Differentiation would push a jet variable past the supported order."""


JET_NAMES = ("u0", "u1", "u2", "u3")
JET_CAP = 4

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class ParamEnv:
    """Declares the named constants an expression may mention.

    parameters: free symbolic constants (polynomial variables).
    bindings: identifiers bound to concrete integers at parse time; these are
        substituted immediately and never become polynomial variables, which
        keeps integer exponents like (t+b)^(k-1) inside the fraction field.
    excluded: expression strings that must not vanish for the data to make
        sense (checked by loaders, recorded by the search module).
    """

    def __init__(self, params=(), bindings=None, excluded=()):
        params = tuple(params)
        bindings = dict(bindings or {})
        seen = set()
        for name in params:
            self._check_name(name)
            if name in seen:
                raise ValueError(f"duplicate parameter {name!r}")
            seen.add(name)
        for name, value in bindings.items():
            self._check_name(name)
            if name in seen:
                raise ValueError(f"{name!r} is both a parameter and a binding")
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"binding {name!r} must be an integer")
        self.params = params
        self.bindings = bindings
        self.excluded = tuple(excluded)

        # Generator layout, most significant first: jets ordered by
        # (name, derivative order), then parameters lexicographically,
        # then t at the bottom.  The leading coefficient of a denominator
        # is taken in this order, so c1 - t stays monic as written.
        display = []
        self._jet_index = {}
        for name in reversed(JET_NAMES):
            for order in range(JET_CAP, -1, -1):
                display.append(name + "'" * order)
                self._jet_index[(name, order)] = len(display) - 1
        for name in sorted(params, reverse=True):
            display.append(name)
        display.append("t")
        self._display = tuple(display)
        self._index = {name: i for i, name in enumerate(display)}
        self._t_index = self._index["t"]

        sympy_names = []
        for name in display:
            if "'" in name:
                base = name.rstrip("'")
                sympy_names.append(f"{base}_{len(name) - len(base)}")
            else:
                sympy_names.append(name)
        self._ring, *gens = _sympy_ring(",".join(sympy_names), QQ)
        self._gens = tuple(gens)
        self.zero = Expr._make(self, self._ring.zero, self._ring.one)
        self.one = Expr._make(self, self._ring.one, self._ring.one)

    @staticmethod
    def _check_name(name: str):
        if name == "t" or name in JET_NAMES:
            raise ValueError(f"{name!r} is reserved")
        if not name or name[0] not in _IDENT_START or any(
            ch not in _IDENT_CONT for ch in name
        ):
            raise ValueError(f"invalid identifier {name!r}")
        if name[0] == "u" and len(name) > 1 and name[1].isdigit():
            raise ValueError(f"{name!r} collides with jet naming")

    def const(self, value) -> "Expr":
        value = _as_fraction(value)
        return Expr._make(self, self._ring.ground_new(QQ(value)), self._ring.one)

    def var(self, name: str) -> "Expr":
        if name != "t" and name not in self.params:
            raise KeyError(f"{name!r} is not a declared variable")
        return Expr._make(self, self._gens[self._index[name]], self._ring.one)

    def jet(self, name: str, order: int = 0) -> "Expr":
        if name not in JET_NAMES:
            raise KeyError(f"{name!r} is not a jet variable")
        if not 0 <= order <= JET_CAP:
            raise JetCapError(f"jet order {order} outside 0..{JET_CAP}")
        idx = self._jet_index[(name, order)]
        return Expr._make(self, self._gens[idx], self._ring.one)

    def parse(self, text: str) -> "Expr":
        return parse_expr(text, self)

    def __repr__(self):
        return f"ParamEnv(params={self.params!r}, bindings={self.bindings!r})"


class Expr:
    """A canonical fraction of polynomials over a fixed ParamEnv.

    Invariants: denominator nonzero, gcd(num, den) = 1, denominator monic
    under the environment's variable order, zero is (0, 1).  Two Exprs are
    equal iff their canonical parts are identical.
    """

    __slots__ = ("env", "num", "den")

    @classmethod
    def _make(cls, env, num, den) -> "Expr":
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            num, den = env._ring.zero, env._ring.one
        else:
            num, den = num.cancel(den)
            _, lead = max(den.terms(), key=lambda mc: mc[0])
            if lead != QQ(1):
                num = num.quo_ground(lead)
                den = den.quo_ground(lead)
        self = object.__new__(cls)
        self.env = env
        self.num = num
        self.den = den
        return self

    # -- coercion -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Expr):
            if other.env is not self.env:
                raise ValueError("mixing expressions from different environments")
            return other
        if isinstance(other, (int, Fraction)):
            return self.env.const(other)
        return None

    # -- field operations ---------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.den == other.den:
            return Expr._make(self.env, self.num + other.num, self.den)
        return Expr._make(
            self.env,
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )

    __radd__ = __add__

    def __neg__(self):
        if not self.num:
            return self
        return Expr._make(self.env, -self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Expr._make(self.env, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by zero expression")
        return Expr._make(self.env, self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k >= 0:
            return Expr._make(self.env, self.num**k, self.den**k)
        if not self.num:
            raise ZeroDivisionError("zero to a negative power")
        return Expr._make(self.env, self.den ** (-k), self.num ** (-k))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.env.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return (
            self.env is other.env and self.num == other.num and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    @property
    def is_zero(self) -> bool:
        return not self.num

    # -- calculus -----------------------------------------------------

    def _used_indices(self):
        used = set()
        for poly in (self.num, self.den):
            for mono in poly:
                for i, e in enumerate(mono):
                    if e:
                        used.add(i)
        return used

    def _poly_tderiv(self, poly):
        env = self.env
        out = poly.diff(env._gens[env._t_index])
        for (name, order), idx in env._jet_index.items():
            partial = poly.diff(env._gens[idx])
            if not partial:
                continue
            if order >= JET_CAP:
                raise JetCapError(
                    f"cannot differentiate past jet order {JET_CAP} ({name})"
                )
            out = out + partial * env._gens[env._jet_index[(name, order + 1)]]
        return out

    def differentiate(self) -> "Expr":
        """Total derivative in t; params go to 0, each jet steps up one order."""
        dn = self._poly_tderiv(self.num)
        if self.den == self.env._ring.one:
            return Expr._make(self.env, dn, self.den)
        dd = self._poly_tderiv(self.den)
        return Expr._make(
            self.env, dn * self.den - self.num * dd, self.den * self.den
        )

    # -- evaluation ---------------------------------------------------

    def _poly_eval(self, poly, point) -> Fraction:
        env = self.env
        total = Fraction(0)
        for mono, coeff in poly.terms():
            val = Fraction(int(coeff.numerator), int(coeff.denominator))
            for i, e in enumerate(mono):
                if e:
                    name = env._display[i]
                    if name not in point:
                        raise MissingAssignment(f"no value for {name!r}")
                    val *= _as_fraction(point[name]) ** e
            total += val
        return total

    def eval_at(self, point) -> Fraction:
        """Exact rational value at a point covering every variable present."""
        num = self._poly_eval(self.num, point)
        den = self._poly_eval(self.den, point)
        if den == 0:
            raise PoleError(f"denominator vanishes at {point!r}")
        return num / den

    def substitute(self, assignment) -> "Expr":
        """Substitute exact rational values for a subset of the variables."""
        env = self.env
        idx_val = {}
        for name, value in assignment.items():
            if name not in env._index:
                raise KeyError(f"{name!r} is not a variable of this environment")
            idx_val[env._index[name]] = _as_fraction(value)
        if not idx_val:
            return self

        def sub_poly(poly):
            acc = {}
            for mono, coeff in poly.terms():
                scale = Fraction(1)
                new_mono = list(mono)
                for i, value in idx_val.items():
                    if mono[i]:
                        scale *= value ** mono[i]
                        new_mono[i] = 0
                key = tuple(new_mono)
                cur = acc.get(key, QQ(0))
                acc[key] = cur + coeff * QQ(scale)
            acc = {m: c for m, c in acc.items() if c}
            return env._ring.from_dict(acc)

        return Expr._make(env, sub_poly(self.num), sub_poly(self.den))

    def free_names(self):
        """Display names of the variables that actually occur."""
        return {self.env._display[i] for i in self._used_indices()}

    # -- printing -----------------------------------------------------

    def _poly_str(self, poly) -> str:
        if not poly:
            return "0"
        display = self.env._display
        chunks = []
        for mono, coeff in sorted(poly.terms(), key=lambda mc: mc[0], reverse=True):
            c = Fraction(int(coeff.numerator), int(coeff.denominator))
            factors = []
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append(display[i])
                elif e:
                    factors.append(f"{display[i]}^{e}")
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = str(abs(c)) + "*" + "*".join(factors)
            chunks.append(("-" if c < 0 else "+", body))
        sign, body = chunks[0]
        out = ("-" + body) if sign == "-" else body
        for sign, body in chunks[1:]:
            out += sign + body
        return out

    def __str__(self):
        num_s = self._poly_str(self.num)
        if self.den == self.env._ring.one:
            return num_s
        if len(self.num) > 1:
            num_s = f"({num_s})"
        den_s = self._poly_str(self.den)
        single = len(self.den) == 1 and sum(
            1 for e in next(iter(self.den)) if e
        ) == 1
        if not single:
            den_s = f"({den_s})"
        return f"{num_s}/{den_s}"

    def __repr__(self):
        return f"Expr({self})"


def normalize(e: Expr) -> Expr:
    """Rebuild the canonical pair (idempotent by construction)."""
    return Expr._make(e.env, e.num, e.den)


def differentiate(e: Expr) -> Expr:
    return e.differentiate()


def eval_at(e: Expr, point) -> Fraction:
    return e.eval_at(point)


def is_zero(e: Expr) -> bool:
    return e.is_zero


def numerator(e: Expr) -> Expr:
    """Canonical numerator as a polynomial Expr (denominator 1)."""
    return Expr._make(e.env, e.num, e.env._ring.one)


def denominator(e: Expr) -> Expr:
    """Canonical denominator as a polynomial Expr (denominator 1)."""
    return Expr._make(e.env, e.den, e.env._ring.one)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                raise ExprSyntaxError("floating point literals are not allowed", j)
            tokens.append(("num", int(text[i:j]), i))
            i = j
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            primes = 0
            while j < n and text[j] == "'":
                primes += 1
                j += 1
            tokens.append(("name", (text[i:j].rstrip("'"), primes), i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str, env: ParamEnv):
        self.env = env
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}", tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError("trailing input", tok[2])
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek()[0] in "+-":
            op = self.take()
            rhs = self.product()
            e = e + rhs if op[0] == "+" else e - rhs
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek()[0] in "*/":
            op = self.take()
            rhs = self.unary()
            if op[0] == "/":
                if rhs.is_zero:
                    raise ExprSyntaxError("division by zero expression", op[2])
                e = e / rhs
            else:
                e = e * rhs
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok[0] == "-":
            self.take()
            return -self.unary()
        if tok[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] != "^":
            return base
        op = self.take()
        k = self.exponent()
        if base.is_zero and k <= 0:
            raise ExprSyntaxError("zero to a nonpositive power", op[2])
        return base**k

    def atom(self) -> Expr:
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return self.env.const(value)
        if kind == "name":
            return self.resolve(value[0], value[1], pos)
        if kind == "(":
            e = self.sum()
            self.expect(")")
            return e
        raise ExprSyntaxError("expected a value", pos)

    def resolve(self, name, primes, pos) -> Expr:
        env = self.env
        if name in JET_NAMES:
            if primes > JET_CAP:
                raise ExprSyntaxError(f"jet order above cap {JET_CAP}", pos)
            return env.jet(name, primes)
        if primes:
            raise ExprSyntaxError(f"{name!r} has no derivative tower", pos)
        if name == "t":
            return env.var("t")
        if name in env.bindings:
            return env.const(env.bindings[name])
        if name in env.params:
            return env.var(name)
        raise UndeclaredName(f"undeclared identifier {name!r}", pos)

    # Exponents are folded to concrete integers at parse time; identifiers
    # are only legal here when bound in the environment.

    def exponent(self) -> int:
        pos = self.peek()[2]
        value = self.exp_atom()
        if value.denominator != 1:
            raise ExprSyntaxError("exponent is not an integer", pos)
        return int(value)

    def exp_atom(self) -> Fraction:
        tok = self.take()
        kind, value, pos = tok
        if kind == "num":
            return Fraction(value)
        if kind == "-":
            return -self.exp_atom()
        if kind == "name":
            name, primes = value
            if primes:
                raise ExprSyntaxError("jet in exponent", pos)
            if name in self.env.bindings:
                return Fraction(self.env.bindings[name])
            raise ExprSyntaxError(
                f"exponent identifier {name!r} is not bound to an integer", pos
            )
        if kind == "(":
            e = self.exp_sum()
            self.expect(")")
            return e
        raise ExprSyntaxError("expected an integer exponent", pos)

    def exp_sum(self) -> Fraction:
        e = self.exp_product()
        while self.peek()[0] in "+-":
            op = self.take()
            rhs = self.exp_product()
            e = e + rhs if op[0] == "+" else e - rhs
        return e

    def exp_product(self) -> Fraction:
        e = self.exp_atom()
        while self.peek()[0] in "*/":
            op = self.take()
            rhs = self.exp_atom()
            if op[0] == "/":
                if rhs == 0:
                    raise ExprSyntaxError("division by zero in exponent", op[2])
                e = e / rhs
            else:
                e = e * rhs
        return e


def parse_expr(text: str, env: ParamEnv) -> Expr:
    """Parse expression text into a canonical Expr over env."""
    return _Parser(text, env).parse()
