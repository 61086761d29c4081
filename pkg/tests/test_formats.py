import json
import random
from fractions import Fraction

import pytest

from fairdiv import (
    AEFormula,
    Allocation,
    CnfFormula,
    FormatError,
    InstanceDocument,
    additive_instance,
    exit_code,
    max_atomic_instance,
    parse_ae_dimacs,
    parse_dimacs,
    parse_instance,
    reduce_3cnf_to_po,
    reduce_ae3cnf_to_eef,
    serialize_instance,
)
from fairdiv.formats import (
    allocation_to_json,
    make_report,
    rational_from_json,
    rational_from_text,
    rational_to_json,
    report_to_dict,
    report_to_json,
    sha256_digest,
    strip_volatile,
    utilities_to_json,
)
from fairdiv.model import ContractError, UtilityVector

EXAMPLE_CNF = CnfFormula(3, [[1, 2, -3], [-1, -2, -3]])


# ---------------------------------------------------------------------------
# rationals


def test_rational_json_round_trip():
    assert rational_to_json(Fraction(3)) == 3
    assert rational_to_json(Fraction(-1, 2)) == "-1/2"
    assert rational_from_json(5, "x") == Fraction(5)
    assert rational_from_json("7/3", "x") == Fraction(7, 3)
    assert rational_from_json("-7/3", "x") == Fraction(-7, 3)


def test_rational_json_rejects_floats_and_bools():
    with pytest.raises(FormatError):
        rational_from_json(0.5, "x")
    with pytest.raises(FormatError):
        rational_from_json(True, "x")
    with pytest.raises(FormatError):
        rational_from_json("1/0", "x")
    with pytest.raises(FormatError):
        rational_from_json("1.5", "x")
    with pytest.raises(FormatError):
        rational_from_json("", "x")


def test_rational_from_text():
    assert rational_from_text("-3") == Fraction(-3)
    assert rational_from_text("5/2") == Fraction(5, 2)
    with pytest.raises(ContractError):
        rational_from_text("2.5")


# ---------------------------------------------------------------------------
# instance documents


def random_instance(rng, kind):
    n = rng.randint(1, 5)
    m = rng.randint(0, 5)
    if kind == "additive":
        matrix = [[Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(m)]
                  for _ in range(n)]
        return additive_instance(matrix)
    matrix = [[Fraction(rng.randint(0, 9), rng.randint(1, 9)) for _ in range(m)]
              for _ in range(n)]
    return max_atomic_instance(matrix)


def random_allocation(rng, inst):
    return Allocation([rng.choice([None] + list(range(inst.num_agents)))
                       for _ in range(inst.num_resources)])


def test_round_trip_500_random_documents():
    rng = random.Random(404)
    for trial in range(500):
        kind = "additive" if trial % 2 else "max-atomic"
        inst = random_instance(rng, kind)
        alloc = random_allocation(rng, inst) if trial % 3 else None
        doc = InstanceDocument(inst, alloc)
        parsed = parse_instance(serialize_instance(doc))
        assert parsed.instance == inst
        assert parsed.allocation == alloc
        assert parsed.mapping is None


def test_round_trip_preserves_reduction_roles():
    reduction = reduce_3cnf_to_po(EXAMPLE_CNF)
    doc = InstanceDocument(reduction.instance, reduction.baseline, reduction.mapping)
    parsed = parse_instance(serialize_instance(doc))
    assert parsed.instance == reduction.instance
    assert parsed.allocation == reduction.baseline
    assert parsed.mapping.agent_roles == reduction.mapping.agent_roles
    assert parsed.mapping.resource_roles == reduction.mapping.resource_roles
    assert parsed.mapping.links == reduction.mapping.links
    # structured lookup works after the round trip
    assert parsed.mapping.agent("set", -3) == reduction.mapping.agent("set", -3)
    assert parsed.mapping.resource("lit", 0, 2) == reduction.mapping.resource("lit", 0, 2)


def test_round_trip_eef_reduction_roles():
    reduction = reduce_ae3cnf_to_eef(AEFormula(2, [1], [2], [[1, 2], [-1, -2]]))
    doc = InstanceDocument(reduction.instance, None, reduction.mapping)
    parsed = parse_instance(serialize_instance(doc))
    assert parsed.instance == reduction.instance
    assert parsed.mapping.resource("envy2") == reduction.mapping.resource("envy2")
    assert parsed.mapping.agent("ep", 0, 1) == reduction.mapping.agent("ep", 0, 1)


def test_parse_minimal_document():
    doc = parse_instance('{"kind": "max-atomic", "agents": ["a"],'
                         ' "resources": ["o"], "matrix": [[1]]}')
    assert doc.instance.kind == "max-atomic"
    assert doc.instance.matrix == ((Fraction(1),),)


def test_parse_errors_name_the_offending_path():
    base = {"kind": "additive", "agents": ["a"], "resources": ["o", "p"],
            "matrix": [[1, 2]]}

    bad = dict(base, matrix=[[1]])
    with pytest.raises(FormatError, match=r"matrix\[0\]"):
        parse_instance(json.dumps(bad))

    bad = dict(base, matrix=[[1, 0.5]])
    with pytest.raises(FormatError, match=r"matrix\[0\]\[1\]"):
        parse_instance(json.dumps(bad))

    bad = dict(base, kind="fancy")
    with pytest.raises(FormatError, match="kind"):
        parse_instance(json.dumps(bad))

    bad = dict(base, extra=1)
    with pytest.raises(FormatError, match="extra"):
        parse_instance(json.dumps(bad))

    with pytest.raises(FormatError, match="agents"):
        parse_instance(json.dumps({k: v for k, v in base.items() if k != "agents"}))


def test_parse_rejects_negative_demands_for_max_atomic():
    text = json.dumps({"kind": "max-atomic", "agents": ["a"],
                       "resources": ["o"], "matrix": [[-1]]})
    with pytest.raises(FormatError):
        parse_instance(text)


def test_parse_allocation_validation():
    base = {"kind": "additive", "agents": ["a"], "resources": ["o"],
            "matrix": [[1]]}
    good = dict(base, allocation={"o": "a"})
    assert parse_instance(json.dumps(good)).allocation.owner == (0,)

    with pytest.raises(FormatError, match="allocation"):
        parse_instance(json.dumps(dict(base, allocation={"o": "nobody"})))
    with pytest.raises(FormatError, match="allocation"):
        parse_instance(json.dumps(dict(base, allocation={"mystery": "a"})))


def test_parse_not_json_at_all():
    with pytest.raises(FormatError):
        parse_instance("][")
    with pytest.raises(FormatError):
        parse_instance('"just a string"')


# ---------------------------------------------------------------------------
# DIMACS


def test_parse_dimacs_example():
    formula = parse_dimacs("c the running example\np cnf 3 2\n1 2 -3 0\n-1 -2 -3 0\n")
    assert formula == EXAMPLE_CNF


def test_parse_dimacs_empty_formula():
    formula = parse_dimacs("p cnf 1 0\n")
    assert formula.num_vars == 1
    assert formula.clauses == ()


def test_parse_dimacs_clause_spanning_lines():
    formula = parse_dimacs("p cnf 3 1\n1\n2\n-3 0\n")
    assert formula.clauses == ((1, 2, -3),)


def test_parse_dimacs_wide_clause_is_fine_here():
    formula = parse_dimacs("p cnf 4 1\n1 2 3 4 0\n")
    assert len(formula.clauses[0]) == 4
    with pytest.raises(ContractError):
        reduce_3cnf_to_po(formula)   # the gadget is where 3CNF is enforced


def test_parse_dimacs_errors():
    for text in (
        "1 2 0\n",                       # no header
        "p cnf 2 1\np cnf 2 1\n1 0\n",   # duplicate header
        "p cnf 2 1\n3 0\n",              # literal out of range
        "p cnf 2 1\n1 2\n",              # missing terminator
        "p cnf 2 2\n1 0\n",              # fewer clauses than declared
        "p cnf 2 1\n1 0\n2 0\n",         # more clauses than declared
        "p cnf 2 1\n0\n",                # empty clause
        "p cnf 2 1\nx1 0\n",             # junk token
        "p cnf -1 0\n",                  # bad header numbers
    ):
        with pytest.raises(FormatError):
            parse_dimacs(text)


def test_parse_ae_dimacs_example():
    formula = parse_ae_dimacs("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n")
    assert formula.forall_vars == (1,)
    assert formula.exists_vars == (2,)
    assert formula.clauses == ((1, 2), (-1, -2))


def test_parse_ae_dimacs_errors():
    for text in (
        "p cnf 2 1\ne 2 0\na 1 0\n1 2 0\n",      # exists before forall
        "p cnf 2 1\na 1 0\n1 2 0\n",             # missing exists block
        "p cnf 2 1\ne 2 0\n1 2 0\n",             # missing forall block
        "p cnf 2 1\na 1 0\ne 1 2 0\n1 2 0\n",    # variable quantified twice
        "p cnf 3 1\na 1 0\ne 2 0\n1 2 0\n",      # variable 3 unquantified
        "p cnf 2 1\na 1 0\ne 2 0\n1 2 0\na 1 0\n",   # quantifier after clauses
        "p cnf 2 1\na 1 0\na 1 0\ne 2 0\n1 2 0\n",   # duplicate forall block
        "p cnf 2 1\na 1 1 0\ne 2 0\n1 2 0\n",    # duplicate within the block
    ):
        with pytest.raises(FormatError):
            parse_ae_dimacs(text)


# ---------------------------------------------------------------------------
# reports


def test_make_report_shape():
    report = make_report("check-pareto", "no", witness={"x": 1}, nodes=17,
                         wall_ms=3.5, inputs={"f.json": "sha256:00"})
    data = report_to_dict(report)
    assert data["verdict"] == "no"
    assert data["stats"] == {"nodes": 17, "wall_ms": 3.5}
    assert data["provenance"] == {"inputs": {"f.json": "sha256:00"}}
    assert data["generated_at"].endswith("+00:00")
    with pytest.raises(ContractError):
        make_report("x", "maybe")


def test_report_json_is_stable_modulo_volatile_fields():
    a = make_report("find-eef", "yes", nodes=3, wall_ms=1.0)
    b = make_report("find-eef", "yes", nodes=3, wall_ms=2.0)
    assert strip_volatile(report_to_dict(a)) == strip_volatile(report_to_dict(b))
    stripped = strip_volatile(json.loads(report_to_json(a)))
    assert "generated_at" not in stripped
    assert stripped["stats"] == {"nodes": 3}


def test_exit_code_is_a_pure_function_of_the_verdict():
    assert exit_code("yes") == 0
    assert exit_code("no") == 1
    assert exit_code("unknown") == 2
    with pytest.raises(ContractError):
        exit_code("perhaps")
    for verdict, expected in (("yes", 0), ("no", 1), ("unknown", 2)):
        report = make_report("anything", verdict, nodes=99)
        assert exit_code(report.verdict) == expected


def test_sha256_digest_format():
    digest = sha256_digest("hello")
    assert digest.startswith("sha256:")
    assert digest == sha256_digest(b"hello")


def test_witness_serialization_helpers():
    inst = additive_instance([[1, 2]], agents=["alice"], resources=["left", "right"])
    assert allocation_to_json(inst, Allocation([0, None])) == {"left": "alice", "right": None}
    assert utilities_to_json(UtilityVector([Fraction(1, 2), 3])) == ["1/2", 3]
