"""Loading subjects (`.tp` source plus sidecar `.schema.json`)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

from . import dsl
from .interp import Executable, compile_program
from .schema import InputSchema, validate_schema

BUNDLED_DIR = Path(__file__).parent / "subjects"

ALIASES = {
    "linear": "linear_search",
    "bubble": "bubble_sort",
    "matrix": "matrix_mult",
    "merge": "merge_sorted",
}


@dataclass
class Subject:
    name: str
    source: str
    program: dsl.Program
    table: dsl.DecisionTable
    schema: InputSchema

    @classmethod
    def from_source(cls, source: str, schema: InputSchema, name: Optional[str] = None) -> "Subject":
        program = dsl.parse(source)
        validate_schema(program, schema)
        return cls(name or program.name, source, program, dsl.assign_labels(program), schema)

    @cached_property
    def executable(self) -> Executable:
        return compile_program(self.program, self.table)

    @property
    def construct(self) -> Optional[str]:
        return self.schema.construct


def resolve_path(ref) -> Path:
    """Map a path, bundled name or alias (``linear``, ``linear.tp``) to a .tp file."""
    path = Path(ref)
    if path.is_file():
        return path
    stem = path.name[:-3] if path.name.endswith(".tp") else path.name
    stem = ALIASES.get(stem, stem)
    bundled = BUNDLED_DIR / f"{stem}.tp"
    if bundled.is_file() and path.parent == Path("."):
        return bundled
    raise FileNotFoundError(f"no such subject: {ref}")


def load_subject(ref, schema_path=None) -> Subject:
    path = resolve_path(ref)
    if schema_path is None:
        schema_path = path.with_name(path.name[:-3] + ".schema.json") if path.name.endswith(".tp") \
            else path.with_suffix(".schema.json")
    source = path.read_text(encoding="utf-8")
    schema = InputSchema.load(schema_path)
    return Subject.from_source(source, schema)


def bundled_names() -> list[str]:
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.tp"))
