import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairdiv import (
    Matching,
    Ordering,
    UtilityVector,
    WeightMatrix,
    WrongUtilityKind,
    additive_instance,
    brute_force_leximin,
    check_weight_invariants,
    decide_lmmuab,
    generate_weights,
    leximin_compare,
    matching_weight,
    max_atomic_instance,
    min_weight_max_matching,
    solve_leximin,
    utility_vector,
)
from fairdiv.model import ContractError

demand_matrices = st.integers(1, 4).flatmap(
    lambda n: st.integers(1, 4).flatmap(
        lambda m: st.lists(
            st.lists(st.integers(0, 9), min_size=m, max_size=m),
            min_size=n, max_size=n)))


# ---------------------------------------------------------------------------
# weight generation


def test_weights_follow_demand_ranks():
    inst = max_atomic_instance([[5, 3], [3, 1]])
    weights = generate_weights(inst)
    assert weights.weights == ((1, 2), (2, 6))
    check_weight_invariants(inst, weights)


def test_equal_demands_equal_weights():
    inst = max_atomic_instance([[4, 4], [4, 4]])
    assert generate_weights(inst).weights == ((1, 1), (1, 1))


def test_single_cell_weight():
    inst = max_atomic_instance([[7]])
    assert generate_weights(inst).weights == ((1,),)


def test_generate_weights_needs_max_atomic():
    with pytest.raises(WrongUtilityKind):
        generate_weights(additive_instance([[1]]))


def test_weight_matrix_validation():
    with pytest.raises(ContractError):
        WeightMatrix(((1, -2),))
    with pytest.raises(ContractError):
        WeightMatrix(((1,), (1, 2)))


def test_invariant_checker_catches_bad_weights():
    inst = max_atomic_instance([[5, 3]])
    with pytest.raises(ContractError):
        # equal weights despite distinct demands
        check_weight_invariants(inst, WeightMatrix(((1, 1),)))
    with pytest.raises(ContractError):
        # antitone but too small: weight(3) must exceed the sum of larger-demand weights
        check_weight_invariants(inst, WeightMatrix(((2, 1),)))


@given(demand_matrices)
def test_weight_invariants_on_random_matrices(matrix):
    inst = max_atomic_instance(matrix)
    check_weight_invariants(inst, generate_weights(inst))


# ---------------------------------------------------------------------------
# matching


def test_matching_examples():
    assert min_weight_max_matching([[1, 2], [2, 1]]).pairs == ((0, 0), (1, 1))
    assert min_weight_max_matching([[3, 5]]).pairs == ((0, 0),)


def test_matching_weight_helper():
    matching = min_weight_max_matching([[1, 2], [2, 1]])
    assert matching_weight([[1, 2], [2, 1]], matching) == 2


def test_matching_validation():
    with pytest.raises(ContractError):
        Matching(((0, 0), (0, 1)))   # agent used twice
    with pytest.raises(ContractError):
        Matching(((0, 0), (1, 0)))   # resource used twice


def test_lexicographic_tie_break():
    # every perfect matching weighs 2; the pair set must be the smallest one
    assert min_weight_max_matching([[1, 1], [1, 1]]).pairs == ((0, 0), (1, 1))
    # 3x2: only two of three agents can be matched; all weights equal
    assert min_weight_max_matching([[1, 1], [1, 1], [1, 1]]).pairs == ((0, 0), (1, 1))
    # 2x3 mirror image
    assert min_weight_max_matching([[1, 1, 1], [1, 1, 1]]).pairs == ((0, 0), (1, 1))


def brute_minimum_weight(rows):
    n, m = len(rows), len(rows[0])
    k = min(n, m)
    best = None
    for agents in itertools.permutations(range(n), k):
        for cols in itertools.permutations(range(m), k):
            pairs = tuple(sorted(zip(agents, cols)))
            weight = sum(rows[i][j] for i, j in pairs)
            key = (weight, pairs)
            if best is None or key < best:
                best = key
    return best


@given(st.lists(st.lists(st.integers(0, 30), min_size=4, max_size=4), min_size=4, max_size=4))
@settings(max_examples=60)
def test_square_matching_is_optimal(rows):
    weight, pairs = brute_minimum_weight(rows)
    matching = min_weight_max_matching(rows)
    assert matching_weight(rows, matching) == weight
    assert matching.pairs == pairs


@given(st.integers(1, 4), st.integers(1, 4), st.data())
@settings(max_examples=60)
def test_rectangular_matching_is_optimal(n, m, data):
    rows = data.draw(st.lists(
        st.lists(st.integers(0, 12), min_size=m, max_size=m), min_size=n, max_size=n))
    weight, pairs = brute_minimum_weight(rows)
    matching = min_weight_max_matching(rows)
    assert len(matching.pairs) == min(n, m)
    assert matching_weight(rows, matching) == weight
    assert matching.pairs == pairs


# ---------------------------------------------------------------------------
# the solver


def test_solve_leximin_two_by_two():
    inst = max_atomic_instance([[5, 3], [4, 1]])
    alloc = solve_leximin(inst)
    assert alloc.owner == (1, 0)
    assert utility_vector(inst, alloc).sorted() == (Fraction(3), Fraction(4))


def test_solve_leximin_single_agent():
    inst = max_atomic_instance([[7, 2]])
    alloc = solve_leximin(inst)
    assert utility_vector(inst, alloc).values == (Fraction(7),)


def test_solve_leximin_zero_row_cannot_be_helped():
    inst = max_atomic_instance([[0, 0], [9, 0]])
    vec = utility_vector(inst, solve_leximin(inst))
    assert vec.sorted() == (Fraction(0), Fraction(9))


def test_solve_leximin_rejects_additive():
    with pytest.raises(WrongUtilityKind):
        solve_leximin(additive_instance([[1]]))


def test_unmatched_resources_stay_unallocated():
    inst = max_atomic_instance([[3, 2, 1]])
    alloc = solve_leximin(inst)
    assert alloc.owner.count(None) == 2
    assert alloc.owner[0] == 0


@given(demand_matrices)
def test_each_agent_gets_at_most_one_resource(matrix):
    alloc = solve_leximin(max_atomic_instance(matrix))
    held = [who for who in alloc.owner if who is not None]
    assert len(held) == len(set(held)) == min(len(matrix), len(matrix[0]))


@given(demand_matrices, st.integers(1, 7), st.integers(1, 7))
@settings(max_examples=60)
def test_scaling_demands_keeps_the_matching(matrix, p, q):
    """Weights see only the demand ordering, so a positive rational rescale
    must leave the chosen pair set untouched."""
    scale = Fraction(p, q)
    inst = max_atomic_instance(matrix)
    scaled = max_atomic_instance([[scale * d for d in row] for row in matrix])
    assert solve_leximin(inst).owner == solve_leximin(scaled).owner


@given(demand_matrices)
@settings(max_examples=80)
def test_solver_matches_brute_force(matrix):
    inst = max_atomic_instance(matrix)
    solved = utility_vector(inst, solve_leximin(inst))
    _, best = brute_force_leximin(inst)
    assert leximin_compare(solved, best) is Ordering.EQUAL


# ---------------------------------------------------------------------------
# the decision variant


def test_decide_lmmuab_examples():
    inst = max_atomic_instance([[5, 3], [4, 1]])
    assert decide_lmmuab(inst, [1, 5])
    assert not decide_lmmuab(inst, [3, 4])     # the optimum itself
    assert not decide_lmmuab(inst, [4, 4])
    zero = max_atomic_instance([[0], [0]])
    assert not decide_lmmuab(zero, [0, 0])


def test_decide_lmmuab_accepts_utility_vector():
    inst = max_atomic_instance([[5, 3], [4, 1]])
    assert decide_lmmuab(inst, UtilityVector([Fraction(5, 2), 4]))


def test_decide_lmmuab_length_mismatch():
    inst = max_atomic_instance([[5, 3], [4, 1]])
    with pytest.raises(ContractError):
        decide_lmmuab(inst, [1, 2, 3])
