"""End-to-end acceptance gates.

Each test exercises one headline guarantee at full scale and prints a single
PASS/FAIL line (emitted outside pytest's capture so the summary is visible in
any run mode). The tests are ordered; later ones reuse cached results of
earlier ones where the work overlaps.
"""

import itertools
import random
import sys
import time
from fractions import Fraction

from fairdiv import (
    AEFormula,
    Allocation,
    CnfFormula,
    Ordering,
    SearchBudget,
    additive_instance,
    ae3cnf_eval,
    augment_both_polarities,
    brute_force_eef,
    brute_force_leximin,
    check_weight_invariants,
    construct_improvement_eef,
    default_big_m,
    dominates,
    dominating_allocation_by_enumeration,
    find_dominating_allocation,
    find_envy,
    generate_weights,
    is_envy_free,
    is_pareto_optimal,
    leximin_compare,
    max_atomic_instance,
    reduce_3cnf_to_po,
    reduce_ae3cnf_to_eef,
    sat_on_partial,
    solve_leximin,
    utility_vector,
    x_forall_allocation_family,
    x_forall_assignments,
)

BIG_BUDGET = SearchBudget(10_000_000)


def _gate(capsys, label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


# ---------------------------------------------------------------------------
# 1. the polynomial solver agrees with exhaustive search


def test_criterion_1_solver_matches_oracle_on_500_instances(capsys):
    rng = random.Random(1001)
    started = time.perf_counter()
    for _ in range(500):
        n, m = rng.randint(1, 5), rng.randint(1, 5)
        matrix = [[rng.randint(0, 9) for _ in range(m)] for _ in range(n)]
        inst = max_atomic_instance(matrix)
        solved = utility_vector(inst, solve_leximin(inst))
        _, best = brute_force_leximin(inst)
        if leximin_compare(solved, best) is not Ordering.EQUAL:
            _gate(capsys, "criterion 1 (solver vs oracle)", False,
                  f"sorted vectors differ on {matrix!r}")
    elapsed = time.perf_counter() - started
    _gate(capsys, "criterion 1 (solver vs oracle)", elapsed < 30,
          f"500/500 instances exact, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. the solver stays fast at n = m = 200


def test_criterion_2_solver_scales_to_200x200(capsys):
    rng = random.Random(2002)
    matrix = [[rng.randint(0, 9) for _ in range(200)] for _ in range(200)]
    inst = max_atomic_instance(matrix)
    started = time.perf_counter()
    allocation = solve_leximin(inst)
    elapsed = time.perf_counter() - started
    check_weight_invariants(inst, generate_weights(inst))
    matched = sum(1 for who in allocation.owner if who is not None)
    _gate(capsys, "criterion 2 (200x200 run)", elapsed < 10 and matched == 200,
          f"solved in {elapsed:.2f}s, {matched} agents matched, weight invariants hold")


# ---------------------------------------------------------------------------
# 3. the worked two-clause example, cell for cell


def test_criterion_3_worked_example_reproduced(capsys):
    from test_reductions import (EXAMPLE_CNF, EXPECTED_AGENTS, EXPECTED_BASELINE,
                                 EXPECTED_MATRIX, EXPECTED_RESOURCES)

    reduction = reduce_3cnf_to_po(EXAMPLE_CNF)
    inst, mapping = reduction.instance, reduction.mapping
    checks = [
        inst.num_agents == 10,
        inst.num_resources == 12,
        inst.agents == EXPECTED_AGENTS,
        inst.resources == EXPECTED_RESOURCES,
        inst.matrix == tuple(tuple(Fraction(v) for v in row) for row in EXPECTED_MATRIX),
        inst.matrix[mapping.agent("set", -3)][mapping.resource("var", 3)] == 2,
        inst.matrix[mapping.agent("unassigned")][mapping.resource("satisfied")] == 4,
        inst.matrix[mapping.agent("satisfied")][mapping.resource("satisfied")] == 2,
        reduction.baseline.owner == EXPECTED_BASELINE,
    ]
    _gate(capsys, "criterion 3 (worked example table)", all(checks),
          f"{sum(checks)}/{len(checks)} table checks exact")


# ---------------------------------------------------------------------------
# 4. satisfiable <=> baseline dominated, across a formula census


def _canonical_clauses():
    lits = [1, -1, 2, -2, 3, -3]
    for size in (1, 2, 3):
        yield from itertools.combinations(lits, size)


def test_criterion_4_improvability_tracks_satisfiability(capsys):
    clauses = list(_canonical_clauses())
    formulas = [CnfFormula(3, [])]
    formulas += [CnfFormula(3, [c]) for c in clauses]
    formulas += [CnfFormula(3, pair)
                 for pair in itertools.combinations_with_replacement(clauses, 2)]
    rng = random.Random(4004)
    for _ in range(100):
        nc = rng.randint(1, 4)
        picked = [[rng.choice([1, -1]) * rng.choice([1, 2, 3, 4])
                   for _ in range(rng.randint(1, 3))] for _ in range(nc)]
        formulas.append(CnfFormula(4, picked))

    started = time.perf_counter()
    sat_count = unknowns = 0
    worst_nodes = 0
    for formula in formulas:
        satisfiable = sat_on_partial(formula).is_yes
        reduction = reduce_3cnf_to_po(formula)
        verdict = find_dominating_allocation(reduction.instance, reduction.baseline,
                                             BIG_BUDGET)
        worst_nodes = max(worst_nodes, verdict.nodes)
        sat_count += satisfiable
        unknowns += verdict.is_unknown
        if verdict.is_unknown or verdict.is_yes != satisfiable:
            _gate(capsys, "criterion 4 (formula census)", False,
                  f"mismatch on {formula.clauses!r}: sat={satisfiable}, verdict={verdict.kind}")
    elapsed = time.perf_counter() - started
    _gate(capsys, "criterion 4 (formula census)", unknowns == 0 and elapsed < 300,
          f"{len(formulas)} formulas ({sat_count} satisfiable), no Unknowns, "
          f"worst search {worst_nodes} nodes, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 5 + 8. the lemma suite for the two-level gadget, then again with 10x M


def _lemma_suite_formulas():
    """>= 50 two-level formulas with |forall| <= 2, |exists| <= 2, <= 3
    clauses, with the true/false mix pinned by hand-built members."""
    false_ones = [
        AEFormula(2, [1], [2], [[1, 2], [1, -2]]),
        AEFormula(2, [1], [2], [[-1, 2], [-1, -2]]),
        AEFormula(3, [1, 2], [3], [[1, 3], [2, -3]]),
        AEFormula(1, [1], [], [[1]]),
        AEFormula(4, [1, 2], [3, 4], [[1, 3], [2, 4], [-3, -4]]),
    ]
    true_ones = [
        AEFormula(2, [1], [2], [[1, 2], [-1, -2]]),
        AEFormula(2, [1], [2], [[-1, 2], [1, -2]]),
        AEFormula(2, [], [1, 2], [[1], [2]]),
        AEFormula(3, [1, 2], [3], [[1, 2, 3], [-1, -2, 3]]),
        AEFormula(3, [1], [2, 3], [[1, 2, 3], [-1, -2, -3]]),
    ]
    rng = random.Random(5005)
    randoms = []
    while len(randoms) < 46:
        n_forall = rng.randint(0, 2)
        n_exists = rng.randint(max(1 - n_forall, 0), 2)
        num_vars = n_forall + n_exists
        variables = list(range(1, num_vars + 1))
        forall = sorted(rng.sample(variables, n_forall))
        exists = [v for v in variables if v not in forall]
        clauses = [[rng.choice([1, -1]) * rng.choice(variables)
                    for _ in range(rng.randint(1, 3))]
                   for _ in range(rng.randint(0, 3))]
        randoms.append(AEFormula(num_vars, forall, exists, clauses))
    return false_ones + true_ones + randoms


_LEMMA_TABLES = {}


def _lemma_suite_table(m_multiplier=1):
    """Per-(formula, forall-assignment) verdicts; every lemma-level assertion
    is checked along the way."""
    if m_multiplier in _LEMMA_TABLES:
        return _LEMMA_TABLES[m_multiplier]
    table = {}
    variants_total = 0
    for idx, raw in enumerate(_lemma_suite_formulas()):
        formula, _ = augment_both_polarities(raw)
        big_m = None if m_multiplier == 1 else m_multiplier * default_big_m(formula)
        reduction = reduce_ae3cnf_to_eef(formula, big_m=big_m)
        inst = reduction.instance

        # (a) every template over every flag combination is envy-free
        for _, allocation in x_forall_allocation_family(reduction, all_flags=True):
            variants_total += 1
            assert find_envy(inst, allocation) is None, \
                f"formula {idx}: a flag variant is not envy-free"

        family_has_eef = False
        for s in x_forall_assignments(formula):
            template = next(
                alloc for s2, alloc in x_forall_allocation_family(reduction)
                if s2 == s)
            sat = sat_on_partial(formula.cnf(), s)
            if sat.is_yes:
                # (b) the constructive improvement defeats the template
                improvement = construct_improvement_eef(reduction, template, sat.witness)
                assert dominates(inst, improvement, template), \
                    f"formula {idx}, s={s.values}: improvement does not dominate"
            else:
                # (c) the search certifies the template efficient
                certified = find_dominating_allocation(inst, template, BIG_BUDGET)
                assert certified.is_no, \
                    f"formula {idx}, s={s.values}: expected a completed No search"
                family_has_eef = True
            table[(idx, s.values)] = sat.is_yes

        # (d) the gadget decides the formula
        truth = ae3cnf_eval(formula)
        assert truth == (not family_has_eef), \
            f"formula {idx}: truth={truth} but family_has_eef={family_has_eef}"
        if idx % 7 == 0:
            candidates = [alloc for _, alloc in x_forall_allocation_family(reduction)]
            search = brute_force_eef(inst, BIG_BUDGET, candidates=candidates)
            assert search.is_yes == family_has_eef
        table[("truth", idx)] = truth

    _LEMMA_TABLES[m_multiplier] = (table, variants_total)
    return _LEMMA_TABLES[m_multiplier]


def test_criterion_5_lemma_suite(capsys):
    started = time.perf_counter()
    table, variants = _lemma_suite_table()
    elapsed = time.perf_counter() - started
    truths = [v for k, v in table.items() if k[0] == "truth"]
    ok = (len(truths) >= 50 and any(truths) and not all(truths)
          and elapsed < 600)
    _gate(capsys, "criterion 5 (lemma suite)", ok,
          f"{len(truths)} formulas ({sum(truths)} true / {len(truths) - sum(truths)} false), "
          f"{variants} envy-free template variants, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 6. the pruned dominance search is exactly as strong as enumeration


def test_criterion_6_pruning_soundness(capsys):
    rng = random.Random(6006)
    agreements = 0
    for _ in range(200):
        n, m = rng.randint(1, 3), rng.randint(1, 4)
        matrix = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(n)]
        inst = additive_instance(matrix)
        baseline = Allocation([rng.choice([None] + list(range(n))) for _ in range(m)])
        pruned = find_dominating_allocation(inst, baseline, BIG_BUDGET)
        reference = dominating_allocation_by_enumeration(inst, baseline)
        if pruned.is_unknown or pruned.is_yes != (reference is not None):
            _gate(capsys, "criterion 6 (pruning soundness)", False,
                  f"disagreement on {matrix!r} / {baseline.owner!r}")
        if pruned.is_yes:
            assert dominates(inst, pruned.witness, baseline)
        agreements += 1
    _gate(capsys, "criterion 6 (pruning soundness)", agreements == 200,
          f"{agreements}/200 random instances agree with full enumeration")


# ---------------------------------------------------------------------------
# 7. hand-checkable searches for envy-free efficient allocations


def test_criterion_7_eef_hand_cases(capsys):
    own = additive_instance([[1, 0], [0, 1]])
    own_verdict = brute_force_eef(own, BIG_BUDGET)
    shared = additive_instance([[1], [1]])
    shared_verdict = brute_force_eef(shared, BIG_BUDGET)
    checks = [
        own_verdict.is_yes,
        own_verdict.is_yes and is_envy_free(own, own_verdict.witness),
        own_verdict.is_yes and is_pareto_optimal(own, own_verdict.witness, BIG_BUDGET).is_yes,
        shared_verdict.is_no,
    ]
    _gate(capsys, "criterion 7 (EEF hand cases)", all(checks),
          "own-item instance Yes with verified witness; contested item No")


# ---------------------------------------------------------------------------
# 8. nothing in the lemma suite depends on the exact size of M


def test_criterion_8_m_robustness(capsys):
    baseline, _ = _lemma_suite_table()
    started = time.perf_counter()
    scaled, _ = _lemma_suite_table(m_multiplier=10)
    elapsed = time.perf_counter() - started
    _gate(capsys, "criterion 8 (M robustness)", baseline == scaled,
          f"verdict tables identical under 10x M ({len(baseline)} entries, {elapsed:.1f}s)")
