"""Instrumented execution of subject programs.

Programs are compiled once into nested closures (expressions into single
generated lambdas); each decision evaluation
appends an event to the trace.  Events are stored as small integer codes
``2 * decision_id + (0 if taken else 1)`` so that rendering and costing are
table lookups.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable, Optional

from . import dsl
from .dsl import (Assign, Binary, Block, Call, DecisionTable, For, If, Index, Let,
                  Num, Program, Return, Unary, Var, While)

DEFAULT_STEP_BUDGET = 10 ** 7

_I64 = 1 << 63
_U64 = 1 << 64


def _wrap(r: int) -> int:
    return ((r + _I64) % _U64) - _I64


def _cdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


@dataclass(frozen=True)
class Trace:
    codes: tuple
    steps_used: int = 0

    @property
    def events(self) -> list[tuple[int, bool]]:
        return [(c >> 1, not (c & 1)) for c in self.codes]

    @classmethod
    def from_events(cls, events, steps_used: int = 0) -> "Trace":
        return cls(tuple(2 * d + (0 if taken else 1) for d, taken in events), steps_used)

    def __len__(self) -> int:
        return len(self.codes)


class ExecutionError(Exception):
    """Execution did not complete; ``trace`` holds the events seen so far."""

    def __init__(self, message: str, trace: Optional[Trace] = None):
        super().__init__(message)
        self.trace = trace


class BudgetExceeded(ExecutionError):
    pass


class ProgramError(ExecutionError):
    """Runtime fault in the subject: index out of bounds or division by zero."""


class UnknownDecision(KeyError):
    pass


class _Fault(Exception):
    pass


class _Budget(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Frame:
    __slots__ = ("env", "codes", "steps", "budget")

    def __init__(self, env, budget):
        self.env = env
        self.codes = []
        self.steps = 0
        self.budget = budget


# ---------------------------------------------------------------- expressions

def _oob(i: int, n: int, name: str):
    raise _Fault(f"index {i} out of bounds for {name}[{n}]")


def _oob2(i: int, j: int, name: str):
    raise _Fault(f"index [{i}][{j}] out of bounds for {name}")


def _oob_row(i: int, n: int, name: str):
    raise _Fault(f"row index {i} out of bounds for {name}[{n}]")


def _div(x: int, y: int) -> int:
    if y == 0:
        raise _Fault("division by zero")
    return _wrap(_cdiv(x, y))


def _mod(x: int, y: int) -> int:
    if y == 0:
        raise _Fault("division by zero")
    return x - y * _cdiv(x, y)


_EXPR_GLOBALS = {"_wrap": _wrap, "_div": _div, "_mod": _mod, "_oob": _oob, "_oob2": _oob2,
                 "_oob_row": _oob_row, "_LO": -_I64, "_HI": _I64}
_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _ExprSource:
    """Translate an expression into the source of one Python expression over
    ``env``.  Only slot numbers, integer literals and identifier names (as
    string literals) end up in the generated text."""

    def __init__(self, slots: dict):
        self.slots = slots
        self.n_temps = 0

    def temp(self) -> str:
        self.n_temps += 1
        return f"_t{self.n_temps}"

    def wrapped(self, inner: str) -> str:
        t = self.temp()
        return f"({t} if _LO <= ({t} := {inner}) < _HI else _wrap({t}))"

    def __call__(self, e) -> str:
        if isinstance(e, Num):
            return str(int(e.value))
        if isinstance(e, Var):
            return f"env[{self.slots[e.name]}]"
        if isinstance(e, Index):
            arr = f"env[{self.slots[e.name]}]"
            name = repr(e.name)
            ti = self.temp()
            i = self(e.indices[0])
            if len(e.indices) == 1:
                return f"({arr}[{ti}] if 0 <= ({ti} := {i}) < len({arr}) else _oob({ti}, len({arr}), {name}))"
            tj = self.temp()
            j = self(e.indices[1])
            cell = (f"({arr}[{ti}][{tj}] if 0 <= ({tj} := {j}) < len({arr}[{ti}]) "
                    f"else _oob2({ti}, {tj}, {name}))")
            return f"({cell} if 0 <= ({ti} := {i}) < len({arr}) else _oob_row({ti}, len({arr}), {name}))"
        if isinstance(e, Unary):
            x = self(e.operand)
            if e.op == "-":
                return self.wrapped(f"-{x}")
            return f"(0 if {x} else 1)"
        if isinstance(e, Binary):
            a, b, op = self(e.left), self(e.right), e.op
            if op in ("+", "-", "*"):
                return self.wrapped(f"{a} {op} {b}")
            if op == "/":
                return f"_div({a}, {b})"
            if op == "%":
                return f"_mod({a}, {b})"
            if op == "&&":
                return f"(1 if {a} and {b} else 0)"
            if op == "||":
                return f"(1 if {a} or {b} else 0)"
            if op in _CMP_OPS:
                return f"(1 if {a} {op} {b} else 0)"
            raise TypeError(op)
        if isinstance(e, Call):
            raise dsl.SemanticError(f"call expression {e.name}(...) is not supported", e.span)
        raise TypeError(e)


def _compile_expr(e, slots: dict) -> Callable:
    src = _ExprSource(slots)(e)
    return eval(f"lambda env: {src}", dict(_EXPR_GLOBALS))  # noqa: S307 (generated source)


def eval_static(expr, bindings: dict) -> int:
    """Evaluate a scalar expression over named integer bindings."""
    if isinstance(expr, str):
        expr = dsl.parse_expression(expr)
    names = {}
    _collect_names(expr, names)
    missing = [n for n in names if n not in bindings]
    if missing:
        raise KeyError(", ".join(missing))
    order = list(names)
    fn = _compile_expr(expr, {n: i for i, n in enumerate(order)})
    try:
        return fn([bindings[n] for n in order])
    except _Fault as exc:
        raise ProgramError(str(exc)) from None


def _collect_names(e, out: dict) -> None:
    if isinstance(e, (Var, Index)):
        out.setdefault(e.name, None)
    for child in getattr(e, "indices", ()) or ():
        _collect_names(child, out)
    for attr in ("operand", "left", "right"):
        if hasattr(e, attr):
            _collect_names(getattr(e, attr), out)


# ----------------------------------------------------------------- statements

class _Compiler:
    def __init__(self, program: Program, table: DecisionTable):
        self.n_slots = 0
        self.decision_ids = {id(node): i for i, (node, _) in enumerate(dsl.iter_decisions(program))}
        if len(self.decision_ids) != len(table):
            raise ValueError("decision table does not match program")
        self.param_slots = {}
        scope = {}
        for p in program.params:
            scope[p.name] = self._new_slot()
            self.param_slots[p.name] = scope[p.name]
        self.body = self.block(program.body, scope)

    def _new_slot(self) -> int:
        self.n_slots += 1
        return self.n_slots - 1

    def block(self, block: Block, scope: dict) -> Callable:
        scope = dict(scope)
        stmts = tuple(self.stmt(s, scope) for s in block.stmts)
        if len(stmts) == 1:
            return stmts[0]

        def run_block(f):
            for s in stmts:
                s(f)
        return run_block

    def stmt(self, s, scope: dict) -> Callable:
        if isinstance(s, Let):
            dims = [_compile_expr(d, scope) for d in s.dims]
            init = _compile_expr(s.init, scope) if s.init is not None else None
            slot = self._new_slot()
            scope[s.name] = slot
            if dims:
                def let_array(f):
                    f.steps += 1
                    if f.steps > f.budget:
                        raise _Budget
                    sizes = [d(f.env) for d in dims]
                    if any(n < 0 for n in sizes):
                        raise _Fault(f"negative array size {sizes}")
                    if len(sizes) == 1:
                        f.env[slot] = [0] * sizes[0]
                    else:
                        f.env[slot] = [[0] * sizes[1] for _ in range(sizes[0])]
                return let_array

            def let_scalar(f):
                f.steps += 1
                if f.steps > f.budget:
                    raise _Budget
                f.env[slot] = init(f.env) if init is not None else 0
            return let_scalar
        if isinstance(s, Assign):
            value = _compile_expr(s.value, scope)
            target = s.target
            if isinstance(target, Var):
                slot = scope[target.name]

                def assign(f):
                    f.steps += 1
                    if f.steps > f.budget:
                        raise _Budget
                    f.env[slot] = value(f.env)
                return assign
            slot = scope[target.name]
            idx = [_compile_expr(i, scope) for i in target.indices]
            name = target.name
            if len(idx) == 1:
                (i0,) = idx

                def assign_index(f):
                    f.steps += 1
                    if f.steps > f.budget:
                        raise _Budget
                    env = f.env
                    arr = env[slot]
                    i = i0(env)
                    if not 0 <= i < len(arr):
                        raise _Fault(f"index {i} out of bounds for {name}[{len(arr)}]")
                    arr[i] = value(env)
                return assign_index
            i0, i1 = idx

            def assign_index2(f):
                f.steps += 1
                if f.steps > f.budget:
                    raise _Budget
                env = f.env
                m = env[slot]
                i, j = i0(env), i1(env)
                if not 0 <= i < len(m) or not 0 <= j < len(m[i]):
                    raise _Fault(f"index [{i}][{j}] out of bounds for {name}")
                m[i][j] = value(env)
            return assign_index2
        if isinstance(s, Return):
            value = _compile_expr(s.value, scope) if s.value is not None else None

            def ret(f):
                f.steps += 1
                if f.steps > f.budget:
                    raise _Budget
                raise _Return(value(f.env) if value is not None else None)
            return ret
        if isinstance(s, If):
            did = self.decision_ids[id(s)]
            t, nt = 2 * did, 2 * did + 1
            cond = _compile_expr(s.cond, scope)
            then = self.block(s.then, scope)
            orelse = self.block(s.orelse, scope) if s.orelse is not None else None

            def if_(f):
                f.steps += 1
                if f.steps > f.budget:
                    raise _Budget
                if cond(f.env):
                    f.codes.append(t)
                    then(f)
                else:
                    f.codes.append(nt)
                    if orelse is not None:
                        orelse(f)
            return if_
        if isinstance(s, While):
            did = self.decision_ids[id(s)]
            t, nt = 2 * did, 2 * did + 1
            cond = _compile_expr(s.cond, scope)
            body = self.block(s.body, scope)

            def while_(f):
                env, codes = f.env, f.codes
                while True:
                    f.steps += 1
                    if f.steps > f.budget:
                        raise _Budget
                    if cond(env):
                        codes.append(t)
                        body(f)
                    else:
                        codes.append(nt)
                        return
            return while_
        if isinstance(s, For):
            did = self.decision_ids[id(s)]
            t, nt = 2 * did, 2 * did + 1
            inner = dict(scope)
            init = self.stmt(s.init, inner) if s.init is not None else None
            cond = _compile_expr(s.cond, inner)
            update = self.stmt(s.update, inner) if s.update is not None else None
            body = self.block(s.body, inner)

            def for_(f):
                if init is not None:
                    init(f)
                env, codes = f.env, f.codes
                while True:
                    f.steps += 1
                    if f.steps > f.budget:
                        raise _Budget
                    if cond(env):
                        codes.append(t)
                        body(f)
                        if update is not None:
                            update(f)
                    else:
                        codes.append(nt)
                        return
            return for_
        raise TypeError(s)


class Executable:
    """A program compiled against its decision table."""

    def __init__(self, program: Program, table: DecisionTable):
        self.program = program
        self.table = table
        c = _Compiler(program, table)
        self._body = c.body
        self._n_slots = c.n_slots
        self._param_slots = c.param_slots
        self.tokens = []
        self.innermost = []
        for d in table:
            self.tokens += [d.label, "-" + d.label]
            self.innermost += [d.innermost_loop, False]

    def run(self, inputs: dict, step_budget: int = DEFAULT_STEP_BUDGET):
        """Execute on ``inputs``; returns ``(Trace, outputs)``.

        ``outputs`` maps each parameter to its final value and ``"return"``
        to the returned value (None when the function falls off the end).
        """
        if step_budget < 1:
            raise ValueError("step_budget must be >= 1")
        env = [0] * self._n_slots
        for name, slot in self._param_slots.items():
            if name not in inputs:
                raise KeyError(f"input does not bind parameter {name!r}")
            v = inputs[name]
            env[slot] = copy.deepcopy(v) if isinstance(v, list) else v
        f = _Frame(env, step_budget)
        result = None
        try:
            self._body(f)
        except _Return as r:
            result = r.value
        except _Budget:
            raise BudgetExceeded(
                f"step budget of {step_budget} exhausted (possible infinite loop)",
                Trace(tuple(f.codes), min(f.steps, step_budget))) from None
        except _Fault as exc:
            raise ProgramError(str(exc), Trace(tuple(f.codes), f.steps)) from None
        outputs = {name: env[slot] for name, slot in self._param_slots.items()}
        outputs["return"] = result
        return Trace(tuple(f.codes), f.steps), outputs

    def render(self, trace: Trace) -> str:
        tokens = self.tokens
        try:
            return " ".join([tokens[c] for c in trace.codes])
        except IndexError:
            raise UnknownDecision(max(trace.codes) >> 1) from None

    def cost(self, trace: Trace) -> int:
        inner = self.innermost
        return sum(1 for c in trace.codes if inner[c])


_CACHE: dict = {}


def compile_program(program: Program, table: Optional[DecisionTable] = None) -> Executable:
    key = id(program)
    hit = _CACHE.get(key)
    if hit is not None and hit.program is program and (table is None or hit.table == table):
        return hit
    exe = Executable(program, table if table is not None else dsl.assign_labels(program))
    if len(_CACHE) > 64:
        _CACHE.clear()
    _CACHE[key] = exe
    return exe


def execute(program: Program, table: DecisionTable, inputs: dict,
            step_budget: int = DEFAULT_STEP_BUDGET):
    return compile_program(program, table).run(inputs, step_budget)


# ------------------------------------------------------------------ path keys

def render_trace(trace: Trace, table: DecisionTable) -> str:
    tokens = []
    n = len(table)
    for c in trace.codes:
        did = c >> 1
        if did >= n:
            raise UnknownDecision(did)
        label = table[did].label
        tokens.append(label if not c & 1 else "-" + label)
    return " ".join(tokens)


def parse_path(key: str, table: DecisionTable) -> Trace:
    """Inverse of :func:`render_trace` (steps_used is not recoverable: 0)."""
    events = []
    for tok in key.split():
        taken = not tok.startswith("-")
        label = tok if taken else tok[1:]
        try:
            d = table.by_label(label)
        except (KeyError, ValueError):
            raise UnknownDecision(tok) from None
        events.append((d.id, taken))
    return Trace.from_events(events)


def trace_length(trace) -> int:
    if isinstance(trace, str):
        return len(trace.split())
    return len(trace.codes)


def trace_cost(trace: Trace, table: DecisionTable) -> int:
    """Taken outcomes of innermost-loop decisions: total innermost body runs."""
    return sum(1 for d, taken in trace.events if taken and table[d].innermost_loop)


def path_cost(key: str, table: DecisionTable) -> int:
    return trace_cost(parse_path(key, table), table)
