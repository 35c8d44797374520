"""Input schemas: which parameters are arrays, which scalars size them, and
how random inputs for a given shape are drawn."""
from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Optional, Union

from .dsl import KIND_RANK, Program

ROLES = ("array", "size", "key")
CONSTRAINTS = ("none", "sorted-ascending", "distinct-elements")

Value = Union[int, list]
InputVector = dict  # param name -> int | list[int] | list[list[int]]
Shape = dict  # size-param name -> int


class SchemaError(ValueError):
    def __init__(self, mismatches):
        if isinstance(mismatches, str):
            mismatches = [mismatches]
        self.mismatches = list(mismatches)
        super().__init__("; ".join(self.mismatches))


class InfeasibleConstraint(ValueError):
    pass


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    role: str
    dims: tuple = ()
    fixed: Optional[int] = None
    equals: Optional[str] = None
    constraint: str = "none"

    @property
    def free(self) -> bool:
        return self.role == "size" and self.fixed is None and self.equals is None

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "role": self.role}
        if self.dims:
            d["dims"] = list(self.dims)
        if self.fixed is not None:
            d["fixed"] = self.fixed
        if self.equals is not None:
            d["equals"] = self.equals
        if self.role == "array":
            d["constraint"] = self.constraint
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ParamSpec":
        kind = d["kind"]
        role = d.get("role", "array" if KIND_RANK.get(kind, 0) > 0 else "key")
        return cls(
            name=d["name"], kind=kind, role=role, dims=tuple(d.get("dims", ())),
            fixed=d.get("fixed"), equals=d.get("equals"),
            constraint=d.get("constraint", "none"),
        )


@dataclass(frozen=True)
class InputSchema:
    """Parameter shapes and constraints for one subject.

    ``cost`` is an expression over the size parameters giving the cost
    (innermost-loop body executions) of the longest path for a shape.  When
    absent, the campaign measures it by running the all-zero input.
    """

    params: tuple
    cost: Optional[str] = None
    construct: Optional[str] = None

    def __getitem__(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def free_sizes(self) -> list[str]:
        return [p.name for p in self.params if p.free]

    @property
    def arrays(self) -> list[ParamSpec]:
        return [p for p in self.params if p.role == "array"]

    def to_dict(self) -> dict:
        d = {"params": [p.to_dict() for p in self.params]}
        if self.cost is not None:
            d["cost"] = self.cost
        if self.construct is not None:
            d["construct"] = self.construct
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InputSchema":
        return cls(tuple(ParamSpec.from_dict(p) for p in d["params"]),
                   d.get("cost"), d.get("construct"))

    @classmethod
    def load(cls, path) -> "InputSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def validate_schema(program: Program, schema: InputSchema) -> None:
    """Raise SchemaError listing every mismatch between program and schema."""
    problems = []
    declared = {p.name: p for p in program.params}
    specs = {}
    for spec in schema.params:
        if spec.name in specs:
            problems.append(f"{spec.name}: listed twice in schema")
        specs[spec.name] = spec
    for name in declared:
        if name not in specs:
            problems.append(f"{name}: parameter missing from schema")
    for name, spec in specs.items():
        if name not in declared:
            problems.append(f"{name}: not a parameter of {program.name}")
            continue
        if spec.kind != declared[name].kind:
            problems.append(f"{name}: schema kind {spec.kind} != declared {declared[name].kind}")
        if spec.role not in ROLES:
            problems.append(f"{name}: unknown role {spec.role!r}")
        rank = KIND_RANK.get(spec.kind)
        if rank is None:
            problems.append(f"{name}: unknown kind {spec.kind!r}")
            continue
        if spec.role == "array":
            if rank == 0:
                problems.append(f"{name}: scalar cannot have role 'array'")
            if len(spec.dims) != rank:
                problems.append(f"{name}: needs {rank} dims, got {len(spec.dims)}")
            if spec.constraint not in CONSTRAINTS:
                problems.append(f"{name}: unknown constraint {spec.constraint!r}")
            for dim in spec.dims:
                if isinstance(dim, int):
                    if dim < 0:
                        problems.append(f"{name}: negative fixed dim {dim}")
                elif dim not in specs or specs[dim].role != "size":
                    problems.append(f"{name}: dim {dim!r} is not a declared size scalar")
        else:
            if rank != 0:
                problems.append(f"{name}: array must have role 'array'")
            if spec.role == "key" and (spec.fixed is not None or spec.equals is not None):
                problems.append(f"{name}: key parameters cannot be fixed or coupled")
            if spec.equals is not None:
                if spec.fixed is not None:
                    problems.append(f"{name}: both fixed and coupled")
                target = specs.get(spec.equals)
                if target is None or target.role != "size":
                    problems.append(f"{name}: coupled to {spec.equals!r}, which is not a size scalar")
    # coupling must be acyclic
    for name, spec in specs.items():
        seen = {name}
        cur = spec
        while cur.equals is not None and cur.equals in specs:
            if cur.equals in seen:
                problems.append(f"{name}: cyclic size coupling")
                break
            seen.add(cur.equals)
            cur = specs[cur.equals]
    if problems:
        raise SchemaError(problems)


def resolve_shape(schema: InputSchema, free_values: dict) -> Shape:
    """Complete an assignment of the free size params with fixed/coupled ones."""
    shape = {}
    for p in schema.params:
        if p.role != "size":
            continue
        cur = p
        while cur.equals is not None:
            cur = schema[cur.equals]
        if cur.fixed is not None:
            shape[p.name] = cur.fixed
        else:
            shape[p.name] = free_values[cur.name]
    return shape


def all_shapes(schema: InputSchema, max_size) -> list[Shape]:
    """Every shape with each free size in ``[0, cap]``; ``max_size`` is an int
    or a per-parameter mapping."""
    free = schema.free_sizes
    caps = []
    for name in free:
        cap = max_size.get(name) if isinstance(max_size, dict) else max_size
        if cap is None:
            raise SchemaError(f"{name}: no max_size given")
        caps.append(range(int(cap) + 1))
    return [resolve_shape(schema, dict(zip(free, combo))) for combo in itertools.product(*caps)]


def zero_shape(schema: InputSchema) -> Shape:
    return resolve_shape(schema, {n: 0 for n in schema.free_sizes})


def shape_key(shape: Shape) -> tuple:
    return tuple(sorted(shape.items()))


def array_dims(spec: ParamSpec, shape: Shape) -> tuple:
    return tuple(d if isinstance(d, int) else shape[d] for d in spec.dims)


def element_count(schema: InputSchema, shape: Shape) -> int:
    """Number of independently drawn values (array cells plus key scalars)."""
    total = 0
    for p in schema.params:
        if p.role == "array":
            n = 1
            for d in array_dims(p, shape):
                n *= d
            total += n
        elif p.role == "key":
            total += 1
    return total


def _reshape(flat: list, dims: tuple):
    if len(dims) == 1:
        return list(flat)
    rows, cols = dims
    return [list(flat[r * cols:(r + 1) * cols]) for r in range(rows)]


def satisfies(spec: ParamSpec, flat: list) -> bool:
    if spec.constraint == "sorted-ascending":
        return all(x <= y for x, y in zip(flat, flat[1:]))
    if spec.constraint == "distinct-elements":
        return len(set(flat)) == len(flat)
    return True


def sample_input(schema: InputSchema, shape: Shape, domain: int, rng: random.Random) -> InputVector:
    """Draw one input of the given shape; elements i.i.d. uniform on [0, domain)."""
    out = {}
    for p in schema.params:
        if p.role == "size":
            out[p.name] = shape[p.name]
        elif p.role == "key":
            out[p.name] = rng.randrange(domain)
        else:
            dims = array_dims(p, shape)
            n = 1
            for d in dims:
                n *= d
            if p.constraint == "distinct-elements":
                if n > domain:
                    raise InfeasibleConstraint(
                        f"{p.name}: {n} distinct elements requested from a domain of {domain}")
                flat, seen = [], set()
                while len(flat) < n:
                    v = rng.randrange(domain)
                    if v not in seen:
                        seen.add(v)
                        flat.append(v)
            else:
                flat = [rng.randrange(domain) for _ in range(n)]
                if p.constraint == "sorted-ascending":
                    flat.sort()
            out[p.name] = _reshape(flat, dims)
    return out


def enumerate_inputs(schema: InputSchema, shape: Shape, domain: int):
    """Yield every input of the shape over [0, domain), honouring constraints."""
    slots = []  # (spec, dims, count)
    for p in schema.params:
        if p.role == "array":
            dims = array_dims(p, shape)
            n = 1
            for d in dims:
                n *= d
            slots.append((p, dims, n))
        elif p.role == "key":
            slots.append((p, None, 1))
    total = sum(n for _, _, n in slots)
    for flat in itertools.product(range(domain), repeat=total):
        out, pos, ok = {}, 0, True
        for p, dims, n in slots:
            chunk = list(flat[pos:pos + n])
            pos += n
            if dims is None:
                out[p.name] = chunk[0]
            else:
                if not satisfies(p, chunk):
                    ok = False
                    break
                out[p.name] = _reshape(chunk, dims)
        if not ok:
            continue
        yield {p.name: (shape[p.name] if p.role == "size" else out[p.name]) for p in schema.params}


def check_input(schema: InputSchema, inp: InputVector, domain: Optional[int] = None) -> None:
    """Raise SchemaError if an input does not bind every param at its kind."""
    problems = []
    for p in schema.params:
        if p.name not in inp:
            problems.append(f"{p.name}: unbound")
            continue
        v = inp[p.name]
        rank = KIND_RANK[p.kind]
        if rank == 0:
            if not isinstance(v, int) or isinstance(v, bool):
                problems.append(f"{p.name}: expected int")
            continue
        if not isinstance(v, list) or (rank == 2 and not all(isinstance(r, list) for r in v)):
            problems.append(f"{p.name}: expected {p.kind}")
            continue
        cells = v if rank == 1 else [x for r in v for x in r]
        if not all(isinstance(x, int) for x in cells):
            problems.append(f"{p.name}: non-integer element")
        elif domain is not None and any(x < 0 or x >= domain for x in cells):
            problems.append(f"{p.name}: element outside [0, {domain})")
    extra = set(inp) - set(schema.names)
    problems += [f"{n}: not in schema" for n in sorted(extra)]
    if problems:
        raise SchemaError(problems)
