"""On-disk formats: JSON instance documents, DIMACS formulas, run reports.

Instance documents are plain JSON.  Rationals are encoded as ints or "p/q"
strings — floats are rejected outright, because the whole toolkit promises
exact arithmetic.  A document can optionally carry an allocation (keyed by
resource id) and the role/link annotations produced by the reductions, and
``parse_instance(serialize_instance(doc))`` is the identity.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import Mapping, Optional, Union

from .model import (Additive, Allocation, ContractError, Instance, MaxAtomic,
                    UtilityVector)
from .formulas import AEFormula, CnfFormula
from .reductions import ReductionMap


class FormatError(ValueError):
    """Malformed input document; the message names the offending part."""


# ---------------------------------------------------------------------------
# rationals

_RATIONAL_RE = re.compile(r"^(-?\d+)/([1-9]\d*)$")


def rational_to_json(value: Fraction) -> Union[int, str]:
    value = Fraction(value)
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def rational_from_json(value: object, where: str) -> Fraction:
    if isinstance(value, bool):
        raise FormatError(f"{where}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise FormatError(f'{where}: floats are not exact; write rationals as "p/q" strings')
    if isinstance(value, str):
        match = _RATIONAL_RE.match(value)
        if not match:
            raise FormatError(f"{where}: malformed rational {value!r}")
        return Fraction(int(match.group(1)), int(match.group(2)))
    raise FormatError(f"{where}: expected a rational, got {value!r}")


def rational_from_text(token: str) -> Fraction:
    """Rational from a command-line token: an integer or p/q."""
    token = token.strip()
    try:
        return Fraction(int(token))
    except ValueError:
        pass
    match = _RATIONAL_RE.match(token)
    if not match:
        raise ContractError(f"malformed rational {token!r}")
    return Fraction(int(match.group(1)), int(match.group(2)))


# ---------------------------------------------------------------------------
# instance documents

@dataclass(frozen=True)
class InstanceDocument:
    """An instance, optionally bundled with an allocation and the reduction
    role annotations."""

    instance: Instance
    allocation: Optional[Allocation] = None
    mapping: Optional[ReductionMap] = None


_DOCUMENT_KEYS = {"kind", "agents", "resources", "matrix", "allocation", "roles"}


def document_to_dict(doc: InstanceDocument) -> dict:
    instance = doc.instance
    data: dict = {
        "kind": instance.kind,
        "agents": list(instance.agents),
        "resources": list(instance.resources),
        "matrix": [[rational_to_json(v) for v in row] for row in instance.matrix],
    }
    if doc.allocation is not None:
        data["allocation"] = {
            rid: (None if who is None else instance.agents[who])
            for rid, who in zip(instance.resources, doc.allocation.owner)}
    if doc.mapping is not None:
        data["roles"] = {
            "agents": dict(doc.mapping.agent_roles),
            "resources": dict(doc.mapping.resource_roles),
            "links": {k: dict(v) for k, v in doc.mapping.links.items()},
        }
    return data


def serialize_instance(doc: InstanceDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2, sort_keys=True) + "\n"


def _expect(data: Mapping, key: str, kind: type, where: str):
    if key not in data:
        raise FormatError(f"{where}: missing field {key!r}")
    value = data[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise FormatError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_instance(document: Union[str, Mapping]) -> InstanceDocument:
    """Parse a JSON instance document (text or an already-decoded mapping).

    Raises FormatError naming the offending path on any malformed content:
    bad rationals (floats included), shape mismatches, unknown ids, negative
    demands in a max-atomic matrix, and unrecognized fields.
    """
    if isinstance(document, str):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as e:
            raise FormatError(f"document is not valid JSON: {e}") from None
    else:
        data = document
    if not isinstance(data, Mapping):
        raise FormatError("document: expected a JSON object")
    unknown = set(data) - _DOCUMENT_KEYS
    if unknown:
        raise FormatError(f"document: unknown field {sorted(unknown)[0]!r}")

    kind = _expect(data, "kind", str, "document")
    if kind not in ("additive", "max-atomic"):
        raise FormatError(f'document.kind: expected "additive" or "max-atomic", got {kind!r}')
    agents = _expect(data, "agents", list, "document")
    resources = _expect(data, "resources", list, "document")
    for label, ids in (("agents", agents), ("resources", resources)):
        for i, x in enumerate(ids):
            if not isinstance(x, str) or not x:
                raise FormatError(f"document.{label}[{i}]: ids are non-empty strings")
        if len(set(ids)) != len(ids):
            raise FormatError(f"document.{label}: duplicate id")
    matrix_data = _expect(data, "matrix", list, "document")
    if len(matrix_data) != len(agents):
        raise FormatError(f"document.matrix: {len(matrix_data)} rows for {len(agents)} agents")
    matrix = []
    for i, row in enumerate(matrix_data):
        if not isinstance(row, list) or len(row) != len(resources):
            raise FormatError(f"document.matrix[{i}]: expected a row of {len(resources)} entries")
        values = [rational_from_json(v, f"document.matrix[{i}][{j}]") for j, v in enumerate(row)]
        if kind == "max-atomic":
            for j, v in enumerate(values):
                if v < 0:
                    raise FormatError(f"document.matrix[{i}][{j}]: demands must be non-negative")
        matrix.append(values)

    try:
        utilities = Additive(matrix) if kind == "additive" else MaxAtomic(matrix)
        instance = Instance(agents, resources, utilities)
    except ContractError as e:
        raise FormatError(f"document: {e}") from None

    allocation = None
    if "allocation" in data:
        alloc_data = _expect(data, "allocation", Mapping, "document")
        agent_index = {aid: i for i, aid in enumerate(agents)}
        resource_index = {rid: j for j, rid in enumerate(resources)}
        owner: list[Optional[int]] = [None] * len(resources)
        for rid, aid in alloc_data.items():
            if rid not in resource_index:
                raise FormatError(f"document.allocation: unknown resource id {rid!r}")
            if aid is None:
                continue
            if aid not in agent_index:
                raise FormatError(f"document.allocation[{rid!r}]: unknown agent id {aid!r}")
            owner[resource_index[rid]] = agent_index[aid]
        allocation = Allocation(owner)

    mapping = None
    if "roles" in data:
        roles = _expect(data, "roles", Mapping, "document")
        unknown = set(roles) - {"agents", "resources", "links"}
        if unknown:
            raise FormatError(f"document.roles: unknown field {sorted(unknown)[0]!r}")
        agent_roles = roles.get("agents", {})
        resource_roles = roles.get("resources", {})
        links = roles.get("links", {})
        for section, mapping_data, known in (("agents", agent_roles, set(agents)),
                                             ("resources", resource_roles, set(resources))):
            if not isinstance(mapping_data, Mapping):
                raise FormatError(f"document.roles.{section}: expected an object")
            for key, role in mapping_data.items():
                if key not in known:
                    raise FormatError(f"document.roles.{section}: unknown id {key!r}")
                if not isinstance(role, str):
                    raise FormatError(f"document.roles.{section}[{key!r}]: roles are strings")
        if not isinstance(links, Mapping):
            raise FormatError("document.roles.links: expected an object")
        for key, link in links.items():
            if key not in set(agents) | set(resources):
                raise FormatError(f"document.roles.links: unknown id {key!r}")
            if not isinstance(link, Mapping):
                raise FormatError(f"document.roles.links[{key!r}]: expected an object")
            for field, value in link.items():
                if field not in ("clause", "literal", "variable"):
                    raise FormatError(f"document.roles.links[{key!r}]: unknown field {field!r}")
                if isinstance(value, bool) or not isinstance(value, int):
                    raise FormatError(f"document.roles.links[{key!r}].{field}: expected an int")
        try:
            mapping = ReductionMap.from_serialized(agent_roles, resource_roles, links, instance)
        except (ContractError, KeyError) as e:
            raise FormatError(f"document.roles: {e}") from None

    return InstanceDocument(instance, allocation, mapping)


# ---------------------------------------------------------------------------
# DIMACS

def parse_dimacs(text: str) -> CnfFormula:
    """Standard DIMACS CNF: optional 'c' comment lines, one 'p cnf V C'
    header, then 0-terminated clauses (which may span lines).  Clause sizes
    are not restricted here — constructions that need 3CNF enforce their own
    limit."""
    num_vars: Optional[int] = None
    declared: Optional[int] = None
    clauses: list[tuple[int, ...]] = []
    lits: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        if line[0] == "p":
            if num_vars is not None:
                raise FormatError(f"line {lineno}: duplicate 'p cnf' header")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise FormatError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 0 or declared < 0:
                raise FormatError(f"line {lineno}: negative counts in header")
            continue
        if num_vars is None:
            raise FormatError(f"line {lineno}: clause data before the 'p cnf' header")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise FormatError(f"line {lineno}: unexpected token {token!r}") from None
            if lit == 0:
                if not lits:
                    raise FormatError(f"line {lineno}: empty clause")
                clauses.append(tuple(lits))
                lits = []
            else:
                if abs(lit) > num_vars:
                    raise FormatError(
                        f"line {lineno}: literal {lit} out of range for {num_vars} variables")
                lits.append(lit)
    if num_vars is None:
        raise FormatError("missing 'p cnf' header")
    if lits:
        raise FormatError("last clause is not terminated by 0")
    if len(clauses) != declared:
        raise FormatError(f"header declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, clauses)


def parse_ae_dimacs(text: str) -> AEFormula:
    """DIMACS with quantifier lines: after the 'p cnf' header, exactly one
    'a <vars> 0' line, then exactly one 'e <vars> 0' line, then clauses.
    Every variable must be quantified exactly once."""
    num_vars: Optional[int] = None
    declared: Optional[int] = None
    forall: Optional[list[int]] = None
    exists: Optional[list[int]] = None
    clauses: list[tuple[int, ...]] = []
    lits: list[int] = []

    def parse_block(parts: list[str], lineno: int) -> list[int]:
        if parts[-1] != "0":
            raise FormatError(f"line {lineno}: quantifier line is not terminated by 0")
        block = []
        for token in parts[1:-1]:
            try:
                v = int(token)
            except ValueError:
                raise FormatError(f"line {lineno}: unexpected token {token!r}") from None
            if not 1 <= v <= num_vars:
                raise FormatError(f"line {lineno}: variable {v} out of range for {num_vars} variables")
            if v in block:
                raise FormatError(f"line {lineno}: variable {v} quantified twice")
            block.append(v)
        return block

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        if parts[0] == "p":
            if num_vars is not None:
                raise FormatError(f"line {lineno}: duplicate 'p cnf' header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 0 or declared < 0:
                raise FormatError(f"line {lineno}: negative counts in header")
            continue
        if parts[0] in ("a", "e"):
            if num_vars is None:
                raise FormatError(f"line {lineno}: quantifier line before the 'p cnf' header")
            if clauses or lits:
                raise FormatError(f"line {lineno}: quantifier line after clause data")
            if parts[0] == "a":
                if forall is not None:
                    raise FormatError(f"line {lineno}: second 'a' line")
                if exists is not None:
                    raise FormatError(f"line {lineno}: the 'a' line must precede the 'e' line")
                forall = parse_block(parts, lineno)
            else:
                if exists is not None:
                    raise FormatError(f"line {lineno}: second 'e' line")
                exists = parse_block(parts, lineno)
            continue
        if num_vars is None:
            raise FormatError(f"line {lineno}: clause data before the 'p cnf' header")
        for token in parts:
            try:
                lit = int(token)
            except ValueError:
                raise FormatError(f"line {lineno}: unexpected token {token!r}") from None
            if lit == 0:
                if not lits:
                    raise FormatError(f"line {lineno}: empty clause")
                clauses.append(tuple(lits))
                lits = []
            else:
                if abs(lit) > num_vars:
                    raise FormatError(
                        f"line {lineno}: literal {lit} out of range for {num_vars} variables")
                lits.append(lit)
    if num_vars is None:
        raise FormatError("missing 'p cnf' header")
    if forall is None:
        raise FormatError("missing 'a' quantifier line")
    if exists is None:
        raise FormatError("missing 'e' quantifier line")
    if lits:
        raise FormatError("last clause is not terminated by 0")
    if len(clauses) != declared:
        raise FormatError(f"header declares {declared} clauses, found {len(clauses)}")
    overlap = set(forall) & set(exists)
    if overlap:
        raise FormatError(f"variable {min(overlap)} quantified in both blocks")
    try:
        return AEFormula(num_vars, forall, exists, clauses)
    except ContractError as e:
        raise FormatError(str(e)) from None


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class Report:
    """What a CLI run did: verdict, witness, node count, timing, and the
    digests of its inputs."""

    command: str
    verdict: str                 # "yes" | "no" | "unknown"
    witness: object
    stats: dict
    provenance: dict
    generated_at: str


def make_report(command: str, verdict: str, *, witness: object = None, nodes: int = 0,
                wall_ms: float = 0.0, inputs: Optional[Mapping[str, str]] = None) -> Report:
    if verdict not in ("yes", "no", "unknown"):
        raise ContractError(f"unknown verdict {verdict!r}")
    return Report(
        command=command,
        verdict=verdict,
        witness=witness,
        stats={"nodes": nodes, "wall_ms": wall_ms},
        provenance={"inputs": dict(inputs or {})},
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def report_to_dict(report: Report) -> dict:
    return {
        "command": report.command,
        "verdict": report.verdict,
        "witness": report.witness,
        "stats": dict(report.stats),
        "provenance": dict(report.provenance),
        "generated_at": report.generated_at,
    }


def report_to_json(report: Report) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def strip_volatile(report_data: Mapping) -> dict:
    """Drop the timing metadata (timestamp and wall-clock stat) so two runs
    of the same command can be compared byte-for-byte."""
    data = {k: v for k, v in report_data.items() if k != "generated_at"}
    if isinstance(data.get("stats"), Mapping):
        data["stats"] = {k: v for k, v in data["stats"].items() if k != "wall_ms"}
    return data


def exit_code(verdict: str) -> int:
    """Process exit code as a pure function of the verdict."""
    codes = {"yes": 0, "no": 1, "unknown": 2}
    if verdict not in codes:
        raise ContractError(f"unknown verdict {verdict!r}")
    return codes[verdict]


def sha256_digest(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return "sha256:" + hashlib.sha256(data).hexdigest()


# serialization helpers for witnesses

def allocation_to_json(instance: Instance, allocation: Allocation) -> dict:
    return {rid: (None if who is None else instance.agents[who])
            for rid, who in zip(instance.resources, allocation.owner)}


def utilities_to_json(vector: UtilityVector) -> list:
    return [rational_to_json(v) for v in vector.values]
