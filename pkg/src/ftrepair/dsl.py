"""Text format for repair problems.

A model file declares bounded-integer and boolean variables, an invariant
predicate, five transition relations given as guarded expressions over
current (``x``) and next (``x'``) values, and the window width ``k``.  See
docs/format.md for the grammar.  State enumeration is row major in
declaration order (the first declared variable varies slowest).
"""
from __future__ import annotations

import dataclasses
import os
from typing import Optional

import numpy as np

from .core import Model, Predicate, Relation, StateCapExceeded, StateSpace, UsageError

DEFAULT_STATE_CAP = 10_000_000
STATE_CAP_ENV = "FTREPAIR_STATE_CAP"

_RELATION_SECTIONS = ("program", "environment", "bad", "restricted", "faults")
_KEYWORDS = {
    "model", "var", "bool", "invariant", "k", "true", "false", "xor",
    *_RELATION_SECTIONS,
}


class ParseError(UsageError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


# ----------------------------------------------------------------- AST

@dataclasses.dataclass(frozen=True)
class Loc:
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class Lit:
    value: object  # int or bool
    loc: Loc = dataclasses.field(default=Loc(0, 0), compare=False, repr=False)


@dataclasses.dataclass(frozen=True)
class Var:
    name: str
    primed: bool
    loc: Loc = dataclasses.field(default=Loc(0, 0), compare=False, repr=False)


@dataclasses.dataclass(frozen=True)
class Not:
    operand: "Expr"
    loc: Loc = dataclasses.field(default=Loc(0, 0), compare=False, repr=False)


@dataclasses.dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = dataclasses.field(default=Loc(0, 0), compare=False, repr=False)


Expr = Lit | Var | Not | Bin


@dataclasses.dataclass(frozen=True)
class VarDecl:
    name: str
    lo: int
    hi: int
    is_bool: bool

    @property
    def size(self) -> int:
        return 2 if self.is_bool else self.hi - self.lo + 1


@dataclasses.dataclass(frozen=True)
class ModelSpec:
    name: str
    variables: tuple[VarDecl, ...]
    invariant: Expr
    relations: dict  # section name -> tuple of Expr
    k: int


# --------------------------------------------------------------- lexer

_TWO_CHAR = ("&&", "||", "==", "!=", "<=", ">=", "=>", "..")
_ONE_CHAR = "{}():;,+-<>!'^"


def _tokenize(text: str):
    tokens = []
    line, col, i = 1, 1, 0
    length = len(text)
    while i < length:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < length and text[i] != "\n":
                i += 1
            continue
        start = (line, col)
        two = text[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(("op", two, start))
            i += 2
            col += 2
            continue
        if ch.isdigit():
            j = i
            while j < length and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], start))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < length and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else "ident"
            tokens.append((kind, word, start))
            col += j - i
            i = j
            continue
        if ch in _ONE_CHAR:
            tokens.append(("op", ch, start))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("eof", "", (line, col)))
    return tokens


# -------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        _, _, (line, col) = self.peek()
        raise ParseError(message, line, col)

    def expect(self, kind: str, value: Optional[str] = None) -> str:
        k, v, _ = self.peek()
        if k != kind or (value is not None and v != value):
            want = value if value is not None else kind
            self.error(f"expected {want!r}, found {v or k!r}")
        return self.next()[1]

    def accept(self, kind: str, value: Optional[str] = None) -> bool:
        k, v, _ = self.peek()
        if k == kind and (value is None or v == value):
            self.next()
            return True
        return False

    # model := "model" IDENT "{" var* invariant section* k "}"
    def model(self) -> ModelSpec:
        self.expect("kw", "model")
        name = self.expect("ident")
        self.expect("op", "{")
        variables = []
        while self.peek()[:2] == ("kw", "var"):
            variables.append(self.var_decl())
        if not variables:
            self.error("a model needs at least one variable")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            self.error("duplicate variable name")
        self.expect("kw", "invariant")
        self.expect("op", ":")
        inv = self.expr()
        self.expect("op", ";")
        relations = {}
        for section in _RELATION_SECTIONS:
            self.expect("kw", section)
            self.expect("op", "{")
            exprs = []
            while not self.accept("op", "}"):
                exprs.append(self.expr())
                self.expect("op", ";")
            self.accept("op", ";")
            relations[section] = tuple(exprs)
        self.expect("kw", "k")
        self.expect("op", ":")
        k = int(self.expect("int"))
        self.expect("op", ";")
        self.expect("op", "}")
        self.expect("eof")
        return ModelSpec(name, tuple(variables), inv, relations, k)

    def var_decl(self) -> VarDecl:
        self.expect("kw", "var")
        name = self.expect("ident")
        self.expect("op", ":")
        if self.accept("kw", "bool"):
            decl = VarDecl(name, 0, 1, True)
        else:
            lo = int(self.expect("int"))
            self.expect("op", "..")
            hi = int(self.expect("int"))
            if hi < lo:
                self.error(f"empty domain {lo}..{hi}")
            decl = VarDecl(name, lo, hi, False)
        self.expect("op", ";")
        return decl

    # precedence: => | || | xor | && | ! | comparison | additive | atom
    def expr(self) -> Expr:
        return self.implies()

    def implies(self) -> Expr:
        left = self.disjunct()
        _, v, (line, col) = self.peek()
        if v == "=>":
            self.next()
            right = self.implies()  # right associative
            return Bin("=>", left, right, Loc(line, col))
        return left

    def disjunct(self) -> Expr:
        left = self.xor()
        while self.peek()[1] == "||":
            _, _, (line, col) = self.next()
            left = Bin("||", left, self.xor(), Loc(line, col))
        return left

    def xor(self) -> Expr:
        left = self.conjunct()
        while self.peek()[:2] == ("kw", "xor") or self.peek()[1] == "^":
            _, _, (line, col) = self.next()
            left = Bin("xor", left, self.conjunct(), Loc(line, col))
        return left

    def conjunct(self) -> Expr:
        left = self.negation()
        while self.peek()[1] == "&&":
            _, _, (line, col) = self.next()
            left = Bin("&&", left, self.negation(), Loc(line, col))
        return left

    def negation(self) -> Expr:
        _, v, (line, col) = self.peek()
        if v == "!":
            self.next()
            return Not(self.negation(), Loc(line, col))
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.additive()
        _, v, (line, col) = self.peek()
        if v in ("==", "!=", "<=", ">=", "<", ">"):
            self.next()
            return Bin(v, left, self.additive(), Loc(line, col))
        return left

    def additive(self) -> Expr:
        left = self.atom()
        while self.peek()[1] in ("+", "-"):
            _, op, (line, col) = self.next()
            left = Bin(op, left, self.atom(), Loc(line, col))
        return left

    def atom(self) -> Expr:
        kind, v, (line, col) = self.peek()
        loc = Loc(line, col)
        if kind == "int":
            self.next()
            return Lit(int(v), loc)
        if kind == "kw" and v in ("true", "false"):
            self.next()
            return Lit(v == "true", loc)
        if kind == "ident":
            self.next()
            primed = self.accept("op", "'")
            return Var(v, primed, loc)
        if v == "(":
            self.next()
            inner = self.expr()
            self.expect("op", ")")
            return inner
        self.error(f"expected an expression, found {v or kind!r}")


def parse_model(text: str) -> ModelSpec:
    spec = _Parser(text).model()
    _typecheck_spec(spec)
    return spec


# ---------------------------------------------------------- typecheck

def _typecheck_spec(spec: ModelSpec) -> None:
    env = {v.name: ("bool" if v.is_bool else "int") for v in spec.variables}
    _typecheck(spec.invariant, env, allow_primed=False, want="bool")
    for section in _RELATION_SECTIONS:
        for e in spec.relations[section]:
            _typecheck(e, env, allow_primed=True, want="bool")
    if spec.k <= 1:
        raise UsageError("k must be greater than 1")


def _typecheck(expr: Expr, env, allow_primed: bool, want: Optional[str] = None) -> str:
    def fail(msg, loc):
        raise ParseError(msg, loc.line, loc.col)

    if isinstance(expr, Lit):
        got = "bool" if isinstance(expr.value, bool) else "int"
    elif isinstance(expr, Var):
        if expr.name not in env:
            fail(f"unknown variable {expr.name!r}", expr.loc)
        if expr.primed and not allow_primed:
            fail("primed variables are only allowed in relation expressions", expr.loc)
        got = env[expr.name]
    elif isinstance(expr, Not):
        _typecheck(expr.operand, env, allow_primed, "bool")
        got = "bool"
    elif isinstance(expr, Bin):
        if expr.op in ("&&", "||", "xor", "=>"):
            _typecheck(expr.left, env, allow_primed, "bool")
            _typecheck(expr.right, env, allow_primed, "bool")
            got = "bool"
        elif expr.op in ("+", "-"):
            _typecheck(expr.left, env, allow_primed, "int")
            _typecheck(expr.right, env, allow_primed, "int")
            got = "int"
        elif expr.op in ("==", "!="):
            lt = _typecheck(expr.left, env, allow_primed)
            rt = _typecheck(expr.right, env, allow_primed)
            if lt != rt:
                fail(f"cannot compare {lt} with {rt}", expr.loc)
            got = "bool"
        else:  # ordered comparison
            _typecheck(expr.left, env, allow_primed, "int")
            _typecheck(expr.right, env, allow_primed, "int")
            got = "bool"
    else:  # pragma: no cover
        raise TypeError(expr)
    if want is not None and got != want:
        loc = getattr(expr, "loc", Loc(0, 0))
        fail(f"expected a {want} expression, got {got}", loc)
    return got


# ------------------------------------------------------- pretty print

def _pp(expr: Expr) -> str:
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return "true" if expr.value else "false"
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name + ("'" if expr.primed else "")
    if isinstance(expr, Not):
        return f"!{_pp(expr.operand)}"
    if isinstance(expr, Bin):
        return f"({_pp(expr.left)} {expr.op} {_pp(expr.right)})"
    raise TypeError(expr)


def pretty_print(spec: ModelSpec) -> str:
    lines = [f"model {spec.name} {{"]
    for v in spec.variables:
        dom = "bool" if v.is_bool else f"{v.lo}..{v.hi}"
        lines.append(f"  var {v.name}: {dom};")
    lines.append(f"  invariant: {_pp(spec.invariant)};")
    for section in _RELATION_SECTIONS:
        exprs = spec.relations[section]
        if exprs:
            lines.append(f"  {section} {{")
            for e in exprs:
                lines.append(f"    {_pp(e)};")
            lines.append("  }")
        else:
            lines.append(f"  {section} {{}}")
    lines.append(f"  k: {spec.k};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------- elaborate

def state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    if raw is None:
        return DEFAULT_STATE_CAP
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{STATE_CAP_ENV} must be an integer, got {raw!r}")


def _values(spec: ModelSpec, count: int):
    """Per-variable value arrays over all states, row major in declaration
    order (first variable slowest)."""
    sizes = [v.size for v in spec.variables]
    idx = np.unravel_index(np.arange(count), sizes)
    out = {}
    for decl, comp in zip(spec.variables, idx):
        if decl.is_bool:
            out[decl.name] = comp.astype(bool)
        else:
            out[decl.name] = comp.astype(np.int64) + decl.lo
    return out


def _eval(expr: Expr, env):
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        return env[(expr.name, expr.primed)]
    if isinstance(expr, Not):
        return np.logical_not(_eval(expr.operand, env))
    op = expr.op
    a = _eval(expr.left, env)
    b = _eval(expr.right, env)
    if op == "&&":
        return np.logical_and(a, b)
    if op == "||":
        return np.logical_or(a, b)
    if op == "xor":
        return np.logical_xor(a, b)
    if op == "=>":
        return np.logical_or(np.logical_not(a), b)
    if op == "+":
        return np.asarray(a, dtype=np.int64) + b
    if op == "-":
        return np.asarray(a, dtype=np.int64) - b
    return {
        "==": lambda: np.equal(a, b),
        "!=": lambda: np.not_equal(a, b),
        "<": lambda: np.less(a, b),
        "<=": lambda: np.less_equal(a, b),
        ">": lambda: np.greater(a, b),
        ">=": lambda: np.greater_equal(a, b),
    }[op]()


def _bool_pred(expr: Expr, values, count: int) -> np.ndarray:
    env = {(name, False): arr for name, arr in values.items()}
    res = _eval(expr, env)
    if not isinstance(res, np.ndarray):
        res = np.full(count, bool(res))
    return res.astype(bool)


def _labels(spec: ModelSpec, values, count: int) -> tuple[str, ...]:
    parts = []
    for decl in spec.variables:
        arr = values[decl.name]
        if decl.is_bool:
            parts.append([f"{decl.name}={'true' if v else 'false'}" for v in arr])
        else:
            parts.append([f"{decl.name}={v}" for v in arr])
    return tuple(",".join(p[i] for p in parts) for i in range(count))


def elaborate(spec: ModelSpec, cap: Optional[int] = None) -> Model:
    """Enumerate the state space and evaluate every section into explicit
    predicates and relations."""
    count = 1
    for v in spec.variables:
        count *= v.size
    limit = cap if cap is not None else state_cap()
    if count > limit:
        raise StateCapExceeded(
            f"model has {count} states, exceeding the cap of {limit}"
        )
    values = _values(spec, count)
    space = StateSpace(count, _labels(spec, values, count))
    invariant = Predicate(space, _bool_pred(spec.invariant, values, count))

    relations = {}
    chunk = max(1, (1 << 22) // max(count, 1))
    for section in _RELATION_SECTIONS:
        exprs = spec.relations[section]
        if not exprs:
            relations[section] = Relation.empty(space)
            continue
        blocks = []
        for lo in range(0, count, chunk):
            hi = min(lo + chunk, count)
            env = {}
            for name, arr in values.items():
                env[(name, False)] = arr[lo:hi][:, None]
                env[(name, True)] = arr[None, :]
            block = np.zeros((hi - lo, count), dtype=bool)
            for e in exprs:
                res = _eval(e, env)
                if not isinstance(res, np.ndarray) or res.shape != (hi - lo, count):
                    res = np.broadcast_to(np.asarray(res, dtype=bool), (hi - lo, count))
                block |= res.astype(bool)
            blocks.append(block)
        relations[section] = Relation.from_row_chunks(space, blocks)

    return Model(
        space=space,
        delta_p=relations["program"],
        delta_e=relations["environment"],
        delta_b=relations["bad"],
        delta_r=relations["restricted"],
        faults=relations["faults"],
        invariant=invariant,
        k=spec.k,
    )


def parse_expr(text: str) -> Expr:
    """Parse a standalone expression (used for command-line predicates)."""
    parser = _Parser(text)
    expr = parser.expr()
    parser.expect("eof")
    return expr


def evaluate_predicate(spec: ModelSpec, space: StateSpace, text: str) -> Predicate:
    """Evaluate an unprimed boolean expression over the model's states."""
    expr = parse_expr(text)
    env = {v.name: ("bool" if v.is_bool else "int") for v in spec.variables}
    _typecheck(expr, env, allow_primed=False, want="bool")
    values = _values(spec, space.count)
    return Predicate(space, _bool_pred(expr, values, space.count))


def load_model(path: str, cap: Optional[int] = None) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return elaborate(parse_model(fh.read()), cap=cap)
