"""Explicit branch programs: nested guarded predicates over integer inputs.

A program is a tree of branch nodes.  Executing it on an input vector
produces a trace mapping each reached branch id to its outcome and the
distances toward both directions.
"""
from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .fitness import (BranchRecord, ComparisonOp, FitnessValue, branch_distance,
                      fitness_al, nbd)


class ProgramError(Exception):
    """Malformed program text or an arithmetic fault during execution."""


# ---------------------------------------------------------------- expressions

_FUNCS = {
    "abs": (abs, None),
    "min": (min, None),
    "max": (max, None),
    "sin": (math.sin, 1),
    "cos": (math.cos, 1),
    "int": (int, 1),
}
_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.FloorDiv: "//",
           ast.Mod: "%", ast.Div: "/"}
_CMPOPS = {ast.Lt: ComparisonOp.LT, ast.LtE: ComparisonOp.LE, ast.Gt: ComparisonOp.GT,
           ast.GtE: ComparisonOp.GE, ast.Eq: ComparisonOp.EQ, ast.NotEq: ComparisonOp.NE}


class _Lower(ast.NodeVisitor):
    """Translate a whitelisted Python expression into source over ``x[i]``."""

    def __init__(self, names: Sequence[str]):
        self.index = {n: i for i, n in enumerate(names)}

    def arith(self, node) -> str:
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            return repr(node.value)
        if isinstance(node, ast.Name):
            if node.id not in self.index:
                raise ProgramError(f"unknown input {node.id!r}")
            return f"x[{self.index[node.id]}]"
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return f"({self.arith(node.left)} {_BINOPS[type(node.op)]} {self.arith(node.right)})"
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            sign = "-" if isinstance(node.op, ast.USub) else "+"
            return f"({sign}{self.arith(node.operand)})"
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCS and not node.keywords:
            _, nargs = _FUNCS[node.func.id]
            if nargs is not None and len(node.args) != nargs:
                raise ProgramError(f"{node.func.id} takes {nargs} argument(s)")
            if not node.args:
                raise ProgramError(f"{node.func.id} needs arguments")
            args = ", ".join(self.arith(a) for a in node.args)
            return f"_{node.func.id}({args})"
        raise ProgramError(f"unsupported arithmetic: {ast.dump(node)}")

    def cond(self, node) -> "Cond":
        if isinstance(node, ast.BoolOp):
            parts = [self.cond(v) for v in node.values]
            return And(parts) if isinstance(node.op, ast.And) else Or(parts)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return Not(self.cond(node.operand))
        if isinstance(node, ast.Compare):
            terms = [node.left] + list(node.comparators)
            cmps = []
            for op, lhs, rhs in zip(node.ops, terms, terms[1:]):
                if type(op) not in _CMPOPS:
                    raise ProgramError("only <, <=, >, >=, ==, != comparisons are supported")
                cmps.append(Compare(_CMPOPS[type(op)], self.arith(lhs), self.arith(rhs)))
            return cmps[0] if len(cmps) == 1 else And(cmps)
        raise ProgramError(f"condition must be a comparison or boolean combination: {ast.dump(node)}")


_ENV = {f"_{k}": v[0] for k, v in _FUNCS.items()}


class Cond:
    def compile(self) -> Callable:  # returns x -> (outcome, d_true, d_false)
        raise NotImplementedError


@dataclass
class Compare(Cond):
    op: ComparisonOp
    lhs: str
    rhs: str

    def compile(self):
        # Closed forms of branch_distance(a, b, op, want): (test, d_true, d_false).
        test, dt, df = _CLOSED[self.op]
        src = (f"def run(x):\n"
               f"    a = {self.lhs}\n"
               f"    b = {self.rhs}\n"
               f"    if {test}:\n"
               f"        return True, 0.0, float({df})\n"
               f"    return False, float({dt}), 0.0\n")
        env = dict(_ENV)
        exec(src, env)
        return env["run"]


_CLOSED = {
    ComparisonOp.LT: ("a < b", "a - b + 1", "b - a"),
    ComparisonOp.LE: ("a <= b", "a - b", "b - a + 1"),
    ComparisonOp.GT: ("a > b", "b - a + 1", "a - b"),
    ComparisonOp.GE: ("a >= b", "b - a", "a - b + 1"),
    ComparisonOp.EQ: ("a == b", "abs(a - b)", "1.0"),
    ComparisonOp.NE: ("a != b", "1.0", "abs(a - b)"),
}


@dataclass
class And(Cond):
    parts: List[Cond]

    def compile(self):
        fs = [p.compile() for p in self.parts]

        def run(x):
            recs = [f(x) for f in fs]
            return (all(r[0] for r in recs), float(sum(r[1] for r in recs)),
                    float(min(r[2] for r in recs)))
        return run


@dataclass
class Or(Cond):
    parts: List[Cond]

    def compile(self):
        fs = [p.compile() for p in self.parts]

        def run(x):
            recs = [f(x) for f in fs]
            return (any(r[0] for r in recs), float(min(r[1] for r in recs)),
                    float(sum(r[2] for r in recs)))
        return run


@dataclass
class Not(Cond):
    part: Cond

    def compile(self):
        f = self.part.compile()

        def run(x):
            o, dt, df = f(x)
            return not o, df, dt
        return run


def parse_condition(text: str, names: Sequence[str]) -> Cond:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ProgramError(f"cannot parse condition {text!r}: {exc.msg}") from None
    return _Lower(names).cond(tree.body)


# ---------------------------------------------------------------- programs

@dataclass
class BranchNode:
    branch_id: str
    condition: str
    then_children: List["BranchNode"] = field(default_factory=list)
    else_children: List["BranchNode"] = field(default_factory=list)
    reachable_true: bool = True
    reachable_false: bool = True
    _run: Optional[Callable] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Target:
    branch_id: str
    want: bool
    guard_chain: Tuple[Tuple[str, bool], ...]

    @property
    def key(self) -> str:
        return f"{self.branch_id}:{'T' if self.want else 'F'}"


@dataclass
class BranchProgram:
    name: str
    inputs: List[str]
    domain: List[Tuple[int, int]]
    constants: List[int]
    root: List[BranchNode]
    category: str = "other"
    expected_coverable: Optional[int] = None
    source: str = ""

    def __post_init__(self):
        if not self.inputs:
            raise ProgramError(f"{self.name}: at least one input required")
        if len(self.domain) != len(self.inputs):
            raise ProgramError(f"{self.name}: domain/inputs length mismatch")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ProgramError(f"{self.name}: empty domain [{lo}, {hi}]")
        seen = set()
        for node in self.nodes():
            if node.branch_id in seen:
                raise ProgramError(f"{self.name}: duplicate branch id {node.branch_id}")
            seen.add(node.branch_id)
            node._run = parse_condition(node.condition, self.inputs).compile()
        self._by_id = {n.branch_id: n for n in self.nodes()}

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def nodes(self):
        stack = list(reversed(self.root))
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.else_children))
            stack.extend(reversed(n.then_children))

    def node(self, bid: str) -> BranchNode:
        return self._by_id[bid]


def _eval_node(node: BranchNode, x) -> Tuple[bool, float, float]:
    try:
        return node._run(x)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise ProgramError(f"branch {node.branch_id}: {exc}") from None


def execute(p: BranchProgram, x: Sequence[int]) -> Dict[str, BranchRecord]:
    if len(x) != p.arity:
        raise ProgramError(f"{p.name}: expected {p.arity} inputs, got {len(x)}")
    trace: Dict[str, BranchRecord] = {}

    def walk(nodes):
        for node in nodes:
            o, dt, df = _eval_node(node, x)
            trace[node.branch_id] = BranchRecord(o, dt, df)
            walk(node.then_children if o else node.else_children)
    walk(p.root)
    return trace


def make_targets(p: BranchProgram) -> List[Target]:
    out: List[Target] = []

    def walk(nodes, chain):
        for node in nodes:
            if node.reachable_true:
                out.append(Target(node.branch_id, True, chain))
            if node.reachable_false:
                out.append(Target(node.branch_id, False, chain))
            walk(node.then_children, chain + ((node.branch_id, True),))
            walk(node.else_children, chain + ((node.branch_id, False),))
    walk(p.root, ())
    return out


def target_fitness(p: BranchProgram, target: Target, x: Sequence[int]) -> FitnessValue:
    """Reference path: full execution then AL + nBD."""
    return fitness_al((target.branch_id, target.want), target.guard_chain, execute(p, x))


def make_objective(p: BranchProgram, target: Target) -> Callable[[Sequence[int]], float]:
    """Fast fitness for one target.

    Conditions have no side effects, so only the guard chain and the target
    itself need evaluating; the value equals ``target_fitness(...).value``.
    """
    chain = [(p.node(b), req) for b, req in target.guard_chain]
    tnode = p.node(target.branch_id)
    want = target.want
    n = len(chain)

    def objective(x) -> float:
        for i, (node, req) in enumerate(chain, start=1):
            o, dt, df = _eval_node(node, x)
            if o != req:
                return (n - i) + nbd(dt if req else df)
        o, dt, df = _eval_node(tnode, x)
        return nbd(dt if want else df)
    return objective


# ---------------------------------------------------------------- text format

_IF = re.compile(r"^if\s+([A-Za-z_][\w.]*)\s*(\[[^\]]*\])?\s*:\s*(.+)$")


def parse_program(text: str, origin: str = "<text>") -> BranchProgram:
    """Parse the line-oriented program format (see corpus_data/FORMAT.md)."""
    header: Dict[str, str] = {}
    domains: Dict[str, Tuple[int, int]] = {}
    default_domain: Optional[Tuple[int, int]] = None
    body: List[Tuple[int, int, str]] = []  # (lineno, indent, text)

    def fail(lineno, msg):
        raise ProgramError(f"{origin}:{lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "\t" in line[: len(line) - len(line.lstrip())]:
            fail(lineno, "indent with spaces, not tabs")
        indent = len(line) - len(line.lstrip(" "))
        stripped = line.strip()
        if body or stripped.startswith("if "):
            body.append((lineno, indent, stripped))
            continue
        key, _, rest = stripped.partition(" ")
        rest = rest.strip()
        if key == "domain":
            parts = rest.split()
            if len(parts) == 2:
                default_domain = (int(parts[0]), int(parts[1]))
            elif len(parts) == 3:
                domains[parts[0]] = (int(parts[1]), int(parts[2]))
            else:
                fail(lineno, "domain expects 'lo hi' or 'name lo hi'")
        elif key in ("program", "inputs", "constants", "category", "expect"):
            header[key] = rest
        else:
            fail(lineno, f"unknown header key {key!r}")

    def block(i: int, indent: int) -> Tuple[List[BranchNode], int]:
        nodes: List[BranchNode] = []
        while i < len(body):
            lineno, ind, txt = body[i]
            if ind < indent:
                break
            if ind > indent:
                fail(lineno, "unexpected indent")
            if txt == "else:":
                fail(lineno, "else without matching if")
            m = _IF.match(txt)
            if not m:
                fail(lineno, f"expected 'if <id> [flags]: <condition>', got {txt!r}")
            node = BranchNode(m.group(1), m.group(3))
            for flag in filter(None, (f.strip() for f in (m.group(2) or "[]")[1:-1].split(","))):
                if flag == "no-true":
                    node.reachable_true = False
                elif flag == "no-false":
                    node.reachable_false = False
                else:
                    fail(lineno, f"unknown flag {flag!r}")
            i += 1
            if i < len(body) and body[i][1] > indent:
                node.then_children, i = block(i, body[i][1])
            if i < len(body) and body[i][1] == indent and body[i][2] == "else:":
                i += 1
                if i >= len(body) or body[i][1] <= indent:
                    fail(body[i - 1][0], "empty else block")
                node.else_children, i = block(i, body[i][1])
            nodes.append(node)
        return nodes, i

    root: List[BranchNode] = []
    if body:
        if body[0][1] != 0:
            fail(body[0][0], "top-level branch must not be indented")
        root, used = block(0, 0)
        if used != len(body):
            fail(body[used][0], "inconsistent indentation")

    if "program" not in header or "inputs" not in header:
        raise ProgramError(f"{origin}: 'program' and 'inputs' headers are required")
    names = header["inputs"].split()
    dom = []
    for n in names:
        if n in domains:
            dom.append(domains[n])
        elif default_domain is not None:
            dom.append(default_domain)
        else:
            raise ProgramError(f"{origin}: no domain for input {n}")
    consts = [int(c) for c in header.get("constants", "").split()]
    expect = int(header["expect"]) if "expect" in header else None
    return BranchProgram(header["program"], names, dom, consts, root,
                         header.get("category", "other"), expect, text)


def format_program(p: BranchProgram) -> str:
    lines = [f"program {p.name}", f"category {p.category}", f"inputs {' '.join(p.inputs)}"]
    if len(set(p.domain)) == 1:
        lines.append(f"domain {p.domain[0][0]} {p.domain[0][1]}")
    else:
        lines += [f"domain {n} {lo} {hi}" for n, (lo, hi) in zip(p.inputs, p.domain)]
    if p.constants:
        lines.append("constants " + " ".join(str(c) for c in p.constants))
    if p.expected_coverable is not None:
        lines.append(f"expect {p.expected_coverable}")

    def emit(nodes, depth):
        pad = "    " * depth
        for n in nodes:
            flags = [f for f, on in (("no-true", not n.reachable_true),
                                     ("no-false", not n.reachable_false)) if on]
            fl = f" [{', '.join(flags)}]" if flags else ""
            lines.append(f"{pad}if {n.branch_id}{fl}: {n.condition}")
            emit(n.then_children, depth + 1)
            if n.else_children:
                lines.append(f"{pad}else:")
                emit(n.else_children, depth + 1)
    emit(p.root, 0)
    return "\n".join(lines) + "\n"


def load_program(path) -> BranchProgram:
    path = Path(path)
    return parse_program(path.read_text(encoding="utf-8"), str(path))


def load_directory(path) -> List[BranchProgram]:
    return [load_program(f) for f in sorted(Path(path).glob("*.bp"))]
