"""Hardness gadgets: from formulas to allocation instances.

Two constructions live here, both producing additive instances.

* ``reduce_3cnf_to_po``: a 3CNF formula becomes an instance plus a baseline
  allocation such that the formula is satisfiable **iff** the baseline is not
  Pareto-optimal.  Each variable gets a pair of assignment agents (one per
  polarity) whose coefficients count literal occurrences; a "satisfied"
  collector agent and an "unassigned" agent complete the account so that any
  Pareto improvement must encode a satisfying assignment and vice versa.

* ``reduce_ae3cnf_to_eef``: a two-level forall/exists clausal formula becomes
  an instance that admits an envy-free Pareto-optimal allocation **iff** the
  formula is false.  For every assignment ``s`` of the forall block there is
  a family of template allocations (built by ``build_x_forall_allocation``);
  each is always envy-free, and it is Pareto-optimal exactly when the clauses
  are *unsatisfiable* over the exists block given ``s``.  Helper and
  envy-protection agents, compensation resources, and two envy anchor
  resources keep every other corner of the allocation space either envious
  or dominated.

Both constructions are paired with explicit improvement procedures
(``construct_improvement_po`` / ``construct_improvement_eef``) that turn a
satisfying assignment into a dominating allocation, which is how the forward
directions are certified in tests without any search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

from .formulas import (AEFormula, CnfFormula, PartialAssignment,
                       clauses_with_literal, formula_satisfied,
                       is_assignment_over, literal_holds, literal_variable)
from .model import Additive, Allocation, ContractError, Instance, as_rational

# agent roles
ROLE_CLAUSE_AGENT = "clause"
ROLE_ASSIGNMENT = "assignment"
ROLE_EXISTENTIAL_ASSIGNMENT = "existential-assignment"
ROLE_UNIVERSAL_ASSIGNMENT = "universal-assignment"
ROLE_ASSIGNMENT_HELPER = "universal-assignment-helper"
ROLE_ENVY_PROTECTION = "envy-protection"
ROLE_UNASSIGNED = "unassigned"
ROLE_UNASSIGNED_EP = "unassigned-envy-protection"
ROLE_SATISFIED = "satisfied"

# resource roles
ROLE_VARIABLE = "variable"
ROLE_UNIVERSAL_VARIABLE = "universal-variable"
ROLE_EXISTENTIAL_VARIABLE = "existential-variable"
ROLE_VARIABLE_COMP = "universal-variable-compensation"
ROLE_CLAUSE_RESOURCE = "clause"
ROLE_CLAUSE_COMP = "clause-compensation"
ROLE_LITERAL = "literal"
ROLE_UNIVERSAL_LITERAL = "universal-literal"
ROLE_EXISTENTIAL_LITERAL = "existential-literal"
ROLE_HELPER_RESOURCE = "assignment-helper"
ROLE_LITERAL_EP = "literal-envy-protection"
ROLE_SATISFIED_RESOURCE = "satisfied"
ROLE_ENVY_ANCHOR_1 = "envy-anchor-1"
ROLE_ENVY_ANCHOR_2 = "envy-anchor-2"


def _lit_id(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"~x{-lit}"


@dataclass(frozen=True)
class ReductionMap:
    """Bookkeeping that ties instance ids back to formula structure.

    ``agent_roles`` / ``resource_roles`` tag every id with its role;
    ``links`` records which clause / literal / variable an id came from.
    ``agent_key`` / ``resource_key`` are derived indexes for structured
    lookup, e.g. ``mapping.agent("set", -3)`` or
    ``mapping.resource("lit", 0, 2)``.
    """

    agent_roles: dict
    resource_roles: dict
    links: dict
    agent_key: dict
    resource_key: dict

    def agent(self, *key) -> int:
        return self.agent_key[key]

    def resource(self, *key) -> int:
        return self.resource_key[key]

    @staticmethod
    def _agent_structured_key(role: str, link: Mapping) -> tuple:
        if role == ROLE_CLAUSE_AGENT:
            return ("clause", link["clause"])
        if role in (ROLE_ASSIGNMENT, ROLE_EXISTENTIAL_ASSIGNMENT, ROLE_UNIVERSAL_ASSIGNMENT):
            return ("set", link["literal"])
        if role == ROLE_ASSIGNMENT_HELPER:
            return ("helper", link["literal"])
        if role == ROLE_ENVY_PROTECTION:
            return ("ep", link["clause"], link["literal"])
        if role == ROLE_UNASSIGNED:
            return ("unassigned",)
        if role == ROLE_UNASSIGNED_EP:
            return ("unassigned_ep",)
        if role == ROLE_SATISFIED:
            return ("satisfied",)
        raise ContractError(f"unknown agent role {role!r}")

    @staticmethod
    def _resource_structured_key(role: str, link: Mapping) -> tuple:
        if role in (ROLE_VARIABLE, ROLE_UNIVERSAL_VARIABLE, ROLE_EXISTENTIAL_VARIABLE):
            return ("var", link["variable"])
        if role == ROLE_VARIABLE_COMP:
            return ("var_comp", link["variable"])
        if role == ROLE_CLAUSE_RESOURCE:
            return ("clause", link["clause"])
        if role == ROLE_CLAUSE_COMP:
            return ("clause_comp", link["clause"])
        if role in (ROLE_LITERAL, ROLE_UNIVERSAL_LITERAL, ROLE_EXISTENTIAL_LITERAL):
            return ("lit", link["clause"], link["literal"])
        if role == ROLE_LITERAL_EP:
            return ("lit_ep", link["clause"], link["literal"])
        if role == ROLE_HELPER_RESOURCE:
            return ("helper", link["literal"])
        if role == ROLE_SATISFIED_RESOURCE:
            return ("satisfied",)
        if role == ROLE_ENVY_ANCHOR_1:
            return ("envy1",)
        if role == ROLE_ENVY_ANCHOR_2:
            return ("envy2",)
        raise ContractError(f"unknown resource role {role!r}")

    @classmethod
    def from_serialized(cls, agent_roles: Mapping[str, str], resource_roles: Mapping[str, str],
                        links: Mapping[str, Mapping], instance: Instance) -> "ReductionMap":
        agent_key = {}
        for idx, aid in enumerate(instance.agents):
            if aid in agent_roles:
                agent_key[cls._agent_structured_key(agent_roles[aid], links.get(aid, {}))] = idx
        resource_key = {}
        for idx, rid in enumerate(instance.resources):
            if rid in resource_roles:
                resource_key[cls._resource_structured_key(resource_roles[rid], links.get(rid, {}))] = idx
        return cls(dict(agent_roles), dict(resource_roles), {k: dict(v) for k, v in links.items()},
                   agent_key, resource_key)


class _GadgetBuilder:
    """Accumulates agents, resources, and sparse coefficients in order."""

    def __init__(self):
        self.agent_ids: list[str] = []
        self.resource_ids: list[str] = []
        self.agent_roles: dict = {}
        self.resource_roles: dict = {}
        self.links: dict = {}
        self.agent_key: dict = {}
        self.resource_key: dict = {}
        self.coeff: dict = {}          # (agent index, resource index) -> Fraction

    def add_agent(self, aid: str, role: str, key: tuple, **link) -> int:
        idx = len(self.agent_ids)
        self.agent_ids.append(aid)
        self.agent_roles[aid] = role
        if link:
            self.links[aid] = dict(link)
        self.agent_key[key] = idx
        return idx

    def add_resource(self, rid: str, role: str, key: tuple, **link) -> int:
        idx = len(self.resource_ids)
        self.resource_ids.append(rid)
        self.resource_roles[rid] = role
        if link:
            self.links[rid] = dict(link)
        self.resource_key[key] = idx
        return idx

    def set(self, agent_key: tuple, resource_key: tuple, value) -> None:
        cell = (self.agent_key[agent_key], self.resource_key[resource_key])
        self.coeff[cell] = as_rational(value, "coefficient")

    def instance(self) -> Instance:
        n, m = len(self.agent_ids), len(self.resource_ids)
        matrix = [[Fraction(0)] * m for _ in range(n)]
        for (i, j), v in self.coeff.items():
            matrix[i][j] = v
        return Instance(self.agent_ids, self.resource_ids, Additive(matrix))

    def mapping(self) -> ReductionMap:
        return ReductionMap(self.agent_roles, self.resource_roles, self.links,
                            self.agent_key, self.resource_key)


def _check_clause_sizes(clauses: Iterable[tuple[int, ...]]) -> None:
    for k, clause in enumerate(clauses):
        if len(clause) > 3:
            raise ContractError(
                f"clause {k} has {len(clause)} literals; the construction takes at most 3")


# ---------------------------------------------------------------------------
# satisfiability -> Pareto-optimality

@dataclass(frozen=True)
class PoReduction:
    formula: CnfFormula
    instance: Instance
    baseline: Allocation
    mapping: ReductionMap


def reduce_3cnf_to_po(formula: CnfFormula) -> PoReduction:
    """Build the instance + baseline whose Pareto-improvability encodes
    satisfiability of ``formula``.

    Sizes: 2w + w' + 2 agents and w + w' + L + 1 resources, where w is the
    number of variables, w' the number of clauses, and L the total number of
    literal occurrences.
    """
    _check_clause_sizes(formula.clauses)
    w = formula.num_vars
    clauses = formula.clauses
    b = _GadgetBuilder()

    for k in range(len(clauses)):
        b.add_agent(f"a:c{k + 1}", ROLE_CLAUSE_AGENT, ("clause", k), clause=k)
    for v in range(1, w + 1):
        for lit in (v, -v):
            b.add_agent(f"a:set({_lit_id(lit)})", ROLE_ASSIGNMENT, ("set", lit), literal=lit)
    b.add_agent("a:unassigned", ROLE_UNASSIGNED, ("unassigned",))
    b.add_agent("a:satisfied", ROLE_SATISFIED, ("satisfied",))

    for v in range(1, w + 1):
        b.add_resource(f"o:x{v}", ROLE_VARIABLE, ("var", v), variable=v)
    for k in range(len(clauses)):
        b.add_resource(f"o:c{k + 1}", ROLE_CLAUSE_RESOURCE, ("clause", k), clause=k)
    for k, clause in enumerate(clauses):
        for lit in clause:
            b.add_resource(f"o:c{k + 1},{_lit_id(lit)}", ROLE_LITERAL, ("lit", k, lit),
                           clause=k, literal=lit)
    b.add_resource("o:satisfied", ROLE_SATISFIED_RESOURCE, ("satisfied",))

    # variable resources: worth 1 to the unassigned agent, and to each
    # polarity's assignment agent as much as that literal occurs
    for v in range(1, w + 1):
        b.set(("unassigned",), ("var", v), 1)
        for lit in (v, -v):
            occurrences = len(clauses_with_literal(clauses, lit))
            if occurrences:
                b.set(("set", lit), ("var", v), occurrences)
    # clause resources: the clause agent or the satisfied collector
    for k in range(len(clauses)):
        b.set(("clause", k), ("clause", k), 1)
        b.set(("satisfied",), ("clause", k), 1)
    # literal occurrence resources: the clause agent or the literal's agent
    for k, clause in enumerate(clauses):
        for lit in clause:
            b.set(("clause", k), ("lit", k, lit), 1)
            b.set(("set", lit), ("lit", k, lit), 1)
    # the bonus resource: the whole point of the gadget.  The unassigned
    # agent's w+1 beats its baseline of w exactly when everything else can be
    # handed off along a satisfying assignment.
    b.set(("satisfied",), ("satisfied",), len(clauses))
    b.set(("unassigned",), ("satisfied",), w + 1)

    mapping = b.mapping()
    owner: list[Optional[int]] = [None] * len(b.resource_ids)
    for v in range(1, w + 1):
        owner[mapping.resource("var", v)] = mapping.agent("unassigned")
    for k, clause in enumerate(clauses):
        owner[mapping.resource("clause", k)] = mapping.agent("clause", k)
        for lit in clause:
            owner[mapping.resource("lit", k, lit)] = mapping.agent("set", lit)
    owner[mapping.resource("satisfied")] = mapping.agent("satisfied")

    return PoReduction(formula, b.instance(), Allocation(owner), mapping)


def _full_assignment(assignment: Union[PartialAssignment, Mapping[int, bool]],
                     num_vars: int) -> dict[int, bool]:
    values = assignment.as_dict() if isinstance(assignment, PartialAssignment) else dict(assignment)
    if set(values) != set(range(1, num_vars + 1)):
        raise ContractError(f"assignment must set exactly the variables 1..{num_vars}")
    return values


def construct_improvement_po(reduction: PoReduction,
                             assignment: Union[PartialAssignment, Mapping[int, bool]]) -> Allocation:
    """Turn a satisfying assignment into an allocation dominating the
    baseline: each variable resource moves to the assignment agent of its
    true literal, that agent hands its occurrence resources to the clause
    agents, the clause agents release their clause resources to the
    satisfied collector, and the bonus resource moves to the unassigned
    agent (its one strict gain, w -> w + 1)."""
    values = _full_assignment(assignment, reduction.formula.num_vars)
    if not formula_satisfied(reduction.formula.clauses, values):
        raise ContractError("the assignment does not satisfy the formula")
    mapping = reduction.mapping
    owner = list(reduction.baseline.owner)
    for v in range(1, reduction.formula.num_vars + 1):
        true_lit = v if values[v] else -v
        owner[mapping.resource("var", v)] = mapping.agent("set", true_lit)
        for k in clauses_with_literal(reduction.formula.clauses, true_lit):
            owner[mapping.resource("lit", k, true_lit)] = mapping.agent("clause", k)
    for k in range(len(reduction.formula.clauses)):
        owner[mapping.resource("clause", k)] = mapping.agent("satisfied")
    owner[mapping.resource("satisfied")] = mapping.agent("unassigned")
    return Allocation(owner)


# ---------------------------------------------------------------------------
# forall/exists -> envy-free + Pareto-optimal

@dataclass(frozen=True)
class EefReduction:
    formula: AEFormula
    instance: Instance
    mapping: ReductionMap
    big_m: Fraction


def _require_both_polarities(formula: AEFormula) -> None:
    for v in range(1, formula.num_vars + 1):
        has_pos = any(v in c for c in formula.clauses)
        has_neg = any(-v in c for c in formula.clauses)
        if not (has_pos and has_neg):
            raise ContractError(
                f"variable {v} does not occur in both polarities; "
                f"apply augment_both_polarities first")


def augment_both_polarities(
        formula: Union[CnfFormula, AEFormula],
) -> tuple[Union[CnfFormula, AEFormula], tuple[tuple[int, int], ...]]:
    """Append the tautological clause {v, not v} for every variable that is
    missing a polarity (or missing entirely).  Tautologies never change the
    formula's truth value, and the result satisfies the both-polarity
    precondition of ``reduce_ae3cnf_to_eef``.

    Returns the (possibly identical) formula of the same kind together with
    the tuple of clauses that were added; idempotent, so a second call adds
    nothing.
    """
    extra = []
    for v in range(1, formula.num_vars + 1):
        has_pos = any(v in c for c in formula.clauses)
        has_neg = any(-v in c for c in formula.clauses)
        if not (has_pos and has_neg):
            extra.append((-v, v))
    if not extra:
        return formula, ()
    clauses = formula.clauses + tuple(extra)
    if isinstance(formula, AEFormula):
        return AEFormula(formula.num_vars, formula.forall_vars,
                         formula.exists_vars, clauses), tuple(extra)
    return CnfFormula(formula.num_vars, clauses), tuple(extra)


def reduce_ae3cnf_to_eef(formula: AEFormula, big_m: Optional[object] = None) -> EefReduction:
    """Build the instance whose envy-free Pareto-optimal allocations encode
    falsity of the two-level formula.

    Requires every variable to occur in both polarities (see
    ``augment_both_polarities``).  ``big_m`` defaults to one more than the
    sum of the absolute values of all ordinary coefficients, which makes the
    large coefficients impossible to compensate; any strictly larger value
    works and leaves all verdicts unchanged.

    Sizes: 4|forall| + 2|exists| + |C| + Lu + 3 agents and
    4|forall| + |exists| + 2|C| + L + Lu + 3 resources, where L counts all
    literal occurrences and Lu only universal ones.
    """
    _check_clause_sizes(formula.clauses)
    _require_both_polarities(formula)
    clauses = formula.clauses
    forall_vars = formula.forall_vars
    exists_vars = formula.exists_vars
    universal = set(forall_vars)
    # one step above everything an agent can reach through ordinary trades
    t = len(exists_vars) + len(forall_vars) + len(clauses) + 1

    def occ(lit: int) -> int:
        return len(clauses_with_literal(clauses, lit))

    b = _GadgetBuilder()
    for k in range(len(clauses)):
        b.add_agent(f"a:c{k + 1}", ROLE_CLAUSE_AGENT, ("clause", k), clause=k)
    for v in forall_vars:
        for lit in (v, -v):
            b.add_agent(f"a:set({_lit_id(lit)})", ROLE_UNIVERSAL_ASSIGNMENT, ("set", lit), literal=lit)
        for lit in (v, -v):
            b.add_agent(f"a:set({_lit_id(lit)}):helper", ROLE_ASSIGNMENT_HELPER,
                        ("helper", lit), literal=lit)
    for v in exists_vars:
        for lit in (v, -v):
            b.add_agent(f"a:set({_lit_id(lit)})", ROLE_EXISTENTIAL_ASSIGNMENT, ("set", lit), literal=lit)
    for k, clause in enumerate(clauses):
        for lit in clause:
            if literal_variable(lit) in universal:
                b.add_agent(f"a:ep(c{k + 1},{_lit_id(lit)})", ROLE_ENVY_PROTECTION,
                            ("ep", k, lit), clause=k, literal=lit)
    b.add_agent("a:unassigned", ROLE_UNASSIGNED, ("unassigned",))
    b.add_agent("a:unassigned:ep", ROLE_UNASSIGNED_EP, ("unassigned_ep",))
    b.add_agent("a:satisfied", ROLE_SATISFIED, ("satisfied",))

    for v in forall_vars:
        b.add_resource(f"o:x{v}", ROLE_UNIVERSAL_VARIABLE, ("var", v), variable=v)
        b.add_resource(f"o:x{v}:comp", ROLE_VARIABLE_COMP, ("var_comp", v), variable=v)
        for lit in (v, -v):
            b.add_resource(f"o:set({_lit_id(lit)}):helper", ROLE_HELPER_RESOURCE,
                           ("helper", lit), literal=lit)
    for v in exists_vars:
        b.add_resource(f"o:x{v}", ROLE_EXISTENTIAL_VARIABLE, ("var", v), variable=v)
    for k in range(len(clauses)):
        b.add_resource(f"o:c{k + 1}", ROLE_CLAUSE_RESOURCE, ("clause", k), clause=k)
        b.add_resource(f"o:c{k + 1}:comp", ROLE_CLAUSE_COMP, ("clause_comp", k), clause=k)
    for k, clause in enumerate(clauses):
        for lit in clause:
            role = ROLE_UNIVERSAL_LITERAL if literal_variable(lit) in universal else ROLE_EXISTENTIAL_LITERAL
            b.add_resource(f"o:c{k + 1},{_lit_id(lit)}", role, ("lit", k, lit), clause=k, literal=lit)
    for k, clause in enumerate(clauses):
        for lit in clause:
            if literal_variable(lit) in universal:
                b.add_resource(f"o:c{k + 1},{_lit_id(lit)}:ep", ROLE_LITERAL_EP,
                               ("lit_ep", k, lit), clause=k, literal=lit)
    b.add_resource("o:satisfied", ROLE_SATISFIED_RESOURCE, ("satisfied",))
    b.add_resource("o:envy1", ROLE_ENVY_ANCHOR_1, ("envy1",))
    b.add_resource("o:envy2", ROLE_ENVY_ANCHOR_2, ("envy2",))

    # ordinary (non-M) coefficients first, so the default M can dominate them
    for k, clause in enumerate(clauses):
        b.set(("satisfied",), ("clause", k), 1)
        b.set(("unassigned",), ("clause_comp", k), 1)
        for lit in clause:
            b.set(("clause", k), ("lit", k, lit), 1)
            if literal_variable(lit) in universal:
                b.set(("helper", lit), ("lit", k, lit), 1)
                b.set(("ep", k, lit), ("lit", k, lit), 1)
            else:
                b.set(("set", lit), ("lit", k, lit), 1)
    for v in forall_vars:
        b.set(("set", v), ("var", v), 1)
        b.set(("set", -v), ("var", v), 1)
        b.set(("set", v), ("var_comp", v), 1)
        b.set(("set", -v), ("var_comp", v), 1)
        b.set(("unassigned",), ("var_comp", v), 1)
        for lit in (v, -v):
            b.set(("helper", lit), ("helper", lit), occ(lit))
            b.set(("set", lit), ("helper", lit), 1)
            b.set(("set", -lit), ("helper", lit), 1)
    for v in exists_vars:
        b.set(("set", v), ("var", v), occ(v))
        b.set(("set", -v), ("var", v), occ(-v))
        b.set(("unassigned",), ("var", v), 1)
    b.set(("unassigned",), ("satisfied",), t)
    b.set(("satisfied",), ("satisfied",), len(clauses))
    b.set(("unassigned",), ("envy1",), 2 * t)
    b.set(("satisfied",), ("envy1",), Fraction(1, 2))
    b.set(("unassigned",), ("envy2",), 3 * t - 1)

    ordinary_sum = sum(abs(v) for v in b.coeff.values())
    if big_m is None:
        m_value = ordinary_sum + 1
    else:
        m_value = as_rational(big_m, "big_m")
        if m_value <= ordinary_sum:
            raise ContractError(
                f"big_m must exceed the sum {ordinary_sum} of ordinary coefficient magnitudes")

    for k, clause in enumerate(clauses):
        b.set(("clause", k), ("clause", k), m_value)
        b.set(("clause", k), ("clause_comp", k), m_value - 1)
        for lit in clause:
            if literal_variable(lit) in universal:
                b.set(("ep", k, lit), ("clause", k), m_value)
                b.set(("ep", k, lit), ("lit_ep", k, lit), m_value)
    b.set(("unassigned_ep",), ("envy2",), m_value)

    return EefReduction(formula, b.instance(), b.mapping(), Fraction(m_value))


def default_big_m(formula: AEFormula) -> Fraction:
    """The M value ``reduce_ae3cnf_to_eef`` picks when none is supplied."""
    return reduce_ae3cnf_to_eef(formula).big_m


def build_x_forall_allocation(reduction: EefReduction, s: PartialAssignment,
                              var_choice: Optional[Mapping[int, bool]] = None,
                              lit_choice: Optional[Mapping[tuple[int, int], bool]] = None) -> Allocation:
    """The template allocation for a forall-block assignment ``s``.

    ``s`` must set exactly the forall variables.  Two kinds of don't-care
    choice points exist, surfaced as flags with lowest-index defaults:

    * ``var_choice[v]``: which polarity's assignment agent takes the
      variable resource o:xv (False = positive literal's agent, the default);
    * ``lit_choice[(k, lit)]``: for a universal literal that is *false*
      under ``s``, whether its occurrence resource goes to the helper agent
      (False, the default) or to the envy-protection agent (True).

    The helper resource of the literal that is true under ``s`` is parked
    with whichever assignment agent did not take the variable resource; the
    false literal's helper resource goes to its own helper agent.
    """
    formula = reduction.formula
    mapping = reduction.mapping
    if not is_assignment_over(s, formula.forall_vars):
        raise ContractError("s must assign exactly the forall variables")
    var_choice = dict(var_choice or {})
    lit_choice = dict(lit_choice or {})
    for v in var_choice:
        if v not in set(formula.forall_vars):
            raise ContractError(f"var_choice mentions non-forall variable {v}")
    universal = set(formula.forall_vars)
    false_occurrences = {
        (k, lit)
        for k, clause in enumerate(formula.clauses)
        for lit in clause
        if literal_variable(lit) in universal and not literal_holds(lit, s.get(literal_variable(lit)))}
    for key in lit_choice:
        if key not in false_occurrences:
            raise ContractError(
                f"lit_choice key {key} is not a universal literal occurrence false under s")

    owner: list[Optional[int]] = [None] * reduction.instance.num_resources
    svalues = s.as_dict()

    for k, clause in enumerate(formula.clauses):
        owner[mapping.resource("clause", k)] = mapping.agent("clause", k)
        for lit in clause:
            if literal_variable(lit) not in universal:
                owner[mapping.resource("lit", k, lit)] = mapping.agent("set", lit)
            elif literal_holds(lit, svalues[literal_variable(lit)]):
                owner[mapping.resource("lit", k, lit)] = mapping.agent("helper", lit)
            elif lit_choice.get((k, lit), False):
                owner[mapping.resource("lit", k, lit)] = mapping.agent("ep", k, lit)
            else:
                owner[mapping.resource("lit", k, lit)] = mapping.agent("helper", lit)
            if literal_variable(lit) in universal:
                owner[mapping.resource("lit_ep", k, lit)] = mapping.agent("ep", k, lit)
        owner[mapping.resource("clause_comp", k)] = mapping.agent("unassigned")

    for v in formula.forall_vars:
        taken = -v if var_choice.get(v, False) else v
        other = -taken
        owner[mapping.resource("var", v)] = mapping.agent("set", taken)
        true_lit = v if svalues[v] else -v
        false_lit = -true_lit
        # the true literal's helper resource is parked with the assignment
        # agent that did not take o:xv; the false literal's helper resource
        # goes home to its helper agent
        owner[mapping.resource("helper", true_lit)] = mapping.agent("set", other)
        owner[mapping.resource("helper", false_lit)] = mapping.agent("helper", false_lit)
        owner[mapping.resource("var_comp", v)] = mapping.agent("unassigned")

    for v in formula.exists_vars:
        owner[mapping.resource("var", v)] = mapping.agent("unassigned")

    owner[mapping.resource("satisfied")] = mapping.agent("satisfied")
    owner[mapping.resource("envy1")] = mapping.agent("unassigned")
    owner[mapping.resource("envy2")] = mapping.agent("unassigned_ep")

    assert all(o is not None for o in owner)
    return Allocation(owner)


def x_forall_assignments(formula: AEFormula) -> Iterator[PartialAssignment]:
    """All 2^|forall| assignments of the forall block, all-false first."""
    for bits in itertools.product((False, True), repeat=len(formula.forall_vars)):
        yield PartialAssignment(dict(zip(formula.forall_vars, bits)))


def x_forall_allocation_family(reduction: EefReduction,
                               all_flags: bool = False) -> Iterator[tuple[PartialAssignment, Allocation]]:
    """The template allocations, one per forall assignment (default flags),
    or every flag combination when ``all_flags`` is set."""
    formula = reduction.formula
    universal = set(formula.forall_vars)
    for s in x_forall_assignments(formula):
        if not all_flags:
            yield s, build_x_forall_allocation(reduction, s)
            continue
        svalues = s.as_dict()
        false_occ = [
            (k, lit)
            for k, clause in enumerate(formula.clauses)
            for lit in clause
            if literal_variable(lit) in universal and not literal_holds(lit, svalues[literal_variable(lit)])]
        for var_bits in itertools.product((False, True), repeat=len(formula.forall_vars)):
            var_choice = dict(zip(formula.forall_vars, var_bits))
            for lit_bits in itertools.product((False, True), repeat=len(false_occ)):
                lit_choice = dict(zip(false_occ, lit_bits))
                yield s, build_x_forall_allocation(reduction, s, var_choice, lit_choice)


def _extract_template(reduction: EefReduction, baseline: Allocation):
    """Recover (s, var_choice, lit_choice) from a template allocation, or
    raise ContractError if the allocation is not one."""
    formula = reduction.formula
    mapping = reduction.mapping
    owner = baseline.owner
    if len(owner) != reduction.instance.num_resources:
        raise ContractError("allocation does not match the instance")
    universal = set(formula.forall_vars)

    svalues: dict[int, bool] = {}
    var_choice: dict[int, bool] = {}
    for v in formula.forall_vars:
        pos_agent = mapping.agent("set", v)
        neg_agent = mapping.agent("set", -v)
        holder = owner[mapping.resource("var", v)]
        if holder == pos_agent:
            var_choice[v] = False
        elif holder == neg_agent:
            var_choice[v] = True
        else:
            raise ContractError(f"o:x{v} is not held by an assignment agent")
        pos_helper_holder = owner[mapping.resource("helper", v)]
        neg_helper_holder = owner[mapping.resource("helper", -v)]
        pos_parked = pos_helper_holder in (pos_agent, neg_agent)
        neg_parked = neg_helper_holder in (pos_agent, neg_agent)
        if pos_parked == neg_parked:
            raise ContractError(f"helper resources of variable {v} do not encode a truth value")
        svalues[v] = pos_parked

    lit_choice: dict[tuple[int, int], bool] = {}
    for k, clause in enumerate(formula.clauses):
        for lit in clause:
            if literal_variable(lit) not in universal:
                continue
            if literal_holds(lit, svalues[literal_variable(lit)]):
                continue
            holder = owner[mapping.resource("lit", k, lit)]
            if holder == mapping.agent("ep", k, lit):
                lit_choice[(k, lit)] = True
            elif holder == mapping.agent("helper", lit):
                lit_choice[(k, lit)] = False
            else:
                raise ContractError(f"occurrence resource of clause {k}, literal {lit} misplaced")

    s = PartialAssignment(svalues)
    rebuilt = build_x_forall_allocation(reduction, s, var_choice, lit_choice)
    if rebuilt != baseline:
        raise ContractError("allocation is not a forall-template allocation")
    return s, var_choice, lit_choice


def construct_improvement_eef(reduction: EefReduction, baseline: Allocation,
                              extension: Union[PartialAssignment, Mapping[int, bool]]) -> Allocation:
    """Given a template allocation for ``s`` and a full assignment extending
    ``s`` that satisfies the clauses, build the allocation that dominates the
    template (the unassigned agent gains exactly 1; nobody loses).

    The resulting allocation deliberately leaves the satisfied collector
    envious of the unassigned agent, so it never counts as envy-free."""
    s, _, _ = _extract_template(reduction, baseline)
    formula = reduction.formula
    mapping = reduction.mapping
    values = _full_assignment(extension, formula.num_vars)
    for v, bit in s.values:
        if values[v] != bit:
            raise ContractError(f"extension disagrees with s on variable {v}")
    if not formula_satisfied(formula.clauses, values):
        raise ContractError("the extension does not satisfy the clauses")

    owner = list(baseline.owner)
    owner[mapping.resource("satisfied")] = mapping.agent("unassigned")
    for k in range(len(formula.clauses)):
        owner[mapping.resource("clause", k)] = mapping.agent("satisfied")
        owner[mapping.resource("clause_comp", k)] = mapping.agent("clause", k)
    for v in formula.forall_vars:
        true_lit = v if values[v] else -v
        parked_with = baseline.owner[mapping.resource("helper", true_lit)]
        owner[mapping.resource("var_comp", v)] = parked_with
        owner[mapping.resource("helper", true_lit)] = mapping.agent("helper", true_lit)
        for k in clauses_with_literal(formula.clauses, true_lit):
            owner[mapping.resource("lit", k, true_lit)] = mapping.agent("clause", k)
    for v in formula.exists_vars:
        ext_lit = v if values[v] else -v
        owner[mapping.resource("var", v)] = mapping.agent("set", ext_lit)
        for k in clauses_with_literal(formula.clauses, ext_lit):
            owner[mapping.resource("lit", k, ext_lit)] = mapping.agent("clause", k)
    return Allocation(owner)
