"""Disks, pivot folding, the exact oracle, and the combined recipe."""

import random
from fractions import Fraction as F

import pytest

from momentcert import (
    MOMENTS,
    PSEUDO_PROBABILITIES,
    CertifyError,
    InvalidPivotError,
    LatticeVector,
    PivotState,
    SubsetIndex,
    assemble,
    certify_recipe,
    decompose,
    from_pseudo,
    gershgorin,
    is_psd_exact,
    pivot_reduce,
    principal_minors_psd,
    quad_eval,
)

# z^N = (1, -1/3, 1, 2) over the two-element lattice: diagonal part
# (1, -1/3, 1) plus the single rank-one term 2 * G({1,2}) G({1,2})^T.
STRATEGY = from_pseudo(
    LatticeVector(
        2,
        PSEUDO_PROBABILITIES,
        {0b00: 1, 0b01: "-1/3", 0b10: 1, 0b11: 2},
    ),
    1,
)

# Moments (1, 1, 1, 1/4): the pair moment is far below what two almost-sure
# singletons allow, so M_1 has a negative eigenvalue.
INDEFINITE = LatticeVector(2, MOMENTS, {0b00: 1, 0b01: 1, 0b10: 1, 0b11: "1/4"})


def frac_matrix(rows):
    return [[F(v) for v in row] for row in rows]


def random_form(n, t, rng):
    values = {
        m: F(rng.randint(-6, 6), rng.randint(1, 3)) for m in range(1 << n)
    }
    return from_pseudo(LatticeVector(n, PSEUDO_PROBABILITIES, values), t)


# ---------------------------------------------------------------------------
# Gershgorin disks
# ---------------------------------------------------------------------------


def test_disks_on_the_strategy_matrix():
    report = gershgorin(assemble(STRATEGY))
    assert report.centers == [F(3), F(5, 3), F(3)]
    assert report.radii == [F(4), F(4), F(4)]
    assert not report.all_nonnegative
    assert report.margin() == F(5, 3) - F(4)


def test_disks_reject_asymmetry():
    with pytest.raises(CertifyError):
        gershgorin([[F(1), F(2)], [F(3), F(1)]])


def test_disks_rows_json_uses_labels():
    report = gershgorin(frac_matrix([[2, 1], [1, 2]]))
    rows = report.rows_json(["{}", "{1}"])
    assert rows == [
        {"row": "{}", "center": "2", "radius": "1"},
        {"row": "{1}", "center": "2", "radius": "1"},
    ]


# ---------------------------------------------------------------------------
# pivoting
# ---------------------------------------------------------------------------


def test_single_pivot_on_the_strategy_form():
    state = PivotState(STRATEGY)
    pivot_reduce(state, SubsetIndex(0b11, 2), SubsetIndex(0b01, 2))
    assert state.working == frac_matrix(
        [
            ["2/3", "-1/3", "1/3"],
            ["-1/3", "5/3", "1/3"],
            ["1/3", "1/3", "2/3"],
        ]
    )
    assert state.terms == []
    report = gershgorin(state.working)
    assert report.centers == [F(2, 3), F(5, 3), F(2, 3)]
    assert report.radii == [F(2, 3), F(2, 3), F(2, 3)]
    assert report.all_nonnegative


def test_pivot_requires_support_at_the_pivot_row():
    form = random_form(3, 1, random.Random(2))
    state = PivotState(form)
    # term {1,2} has no support on row {3}
    with pytest.raises(InvalidPivotError):
        pivot_reduce(state, SubsetIndex(0b011, 3), SubsetIndex(0b100, 3))


def test_pivot_on_unknown_term_fails():
    state = PivotState(STRATEGY)
    with pytest.raises(CertifyError):
        pivot_reduce(state, SubsetIndex(0b01, 2), SubsetIndex(0b00, 2))


def test_pivots_are_congruences():
    # each pivot multiplies the assembled state by T = I + sum m_i E_{i,s}
    # on the left and T^T on the right; replaying the recorded multipliers
    # must reproduce the state exactly, term vectors included.
    rng = random.Random(41)
    for trial in range(8):
        form = random_form(3, 1, rng)
        state = PivotState(form)
        before = state.assembled()
        candidates = [
            (term.J, state.index[i])
            for term in state.terms
            for i, v in enumerate(term.g_vec)
            if v
        ]
        if not candidates:
            continue
        H, S = candidates[rng.randrange(len(candidates))]
        pivot_reduce(state, H, S)
        step = state.trace[-1]
        size = len(state.index)
        s = state.position(S)
        T = [
            [F(1) if i == j else F(0) for j in range(size)]
            for i in range(size)
        ]
        for i, m in step.multipliers:
            T[i][s] = m
        expected = [
            [
                sum(
                    T[i][a] * before[a][b] * T[j][b]
                    for a in range(size)
                    for b in range(size)
                )
                for j in range(size)
            ]
            for i in range(size)
        ]
        assert state.assembled() == expected


def test_fold_negative_terms_only_folds_negatives():
    form = random_form(3, 1, random.Random(9))
    state = PivotState(form)
    negatives = [t.J.bits for t in state.terms if t.coefficient < 0]
    assembled_before = state.assembled()
    state.fold_negative_terms()
    assert all(t.coefficient > 0 for t in state.terms)
    assert {t.J.bits for t in state.terms}.isdisjoint(negatives)
    # folding moves mass between the two summands without changing the total
    assert state.assembled() == assembled_before


# ---------------------------------------------------------------------------
# the exact oracle
# ---------------------------------------------------------------------------


def test_oracle_accepts_gram_matrices():
    rng = random.Random(17)
    for trial in range(20):
        size = rng.randint(1, 5)
        b = [
            [F(rng.randint(-3, 3)) for _ in range(size)]
            for _ in range(rng.randint(1, size + 2))
        ]
        gram = [
            [sum(row[i] * row[j] for row in b) for j in range(size)]
            for i in range(size)
        ]
        cert = is_psd_exact(gram)
        assert cert.verdict == "PSD"
        assert cert.witness is None


def test_oracle_rejects_with_reusable_witness():
    cases = [
        [[F(-1)]],
        frac_matrix([[0, 1], [1, 0]]),
        frac_matrix([[0, -1], [-1, 5]]),
        frac_matrix([[1, 2], [2, 1]]),
        assemble(decompose(INDEFINITE, 1)),
    ]
    for rows in cases:
        cert = is_psd_exact(rows)
        assert cert.verdict == "NotPSD"
        assert quad_eval(rows, cert.witness) < 0


def test_oracle_zero_diagonal_needs_no_negative_entry():
    # all diagonals zero but the matrix is nonzero: indefinite either way,
    # and the witness must pick the sign that actually goes negative.
    for sign in (1, -1):
        rows = frac_matrix([[0, sign], [sign, 0]])
        cert = is_psd_exact(rows)
        assert cert.verdict == "NotPSD"
        assert quad_eval(rows, cert.witness) < 0


def test_minor_scan_agrees_with_the_oracle():
    rng = random.Random(29)
    for trial in range(60):
        size = rng.randint(1, 4)
        rows = [[F(0)] * size for _ in range(size)]
        for i in range(size):
            for j in range(i, size):
                v = F(rng.randint(-3, 3))
                rows[i][j] = v
                rows[j][i] = v
        assert principal_minors_psd(rows) == (
            is_psd_exact(rows).verdict == "PSD"
        )


# ---------------------------------------------------------------------------
# the recipe
# ---------------------------------------------------------------------------


def test_recipe_greedy_settles_the_strategy_form():
    cert = certify_recipe(STRATEGY)
    assert cert.verdict == "PSD"
    assert cert.recipe_conclusive
    assert [step.to_json_dict() for step in cert.schedule] == [
        {"H": "{1,2}", "S": "{1}"}
    ]
    assert cert.final_disks.centers == [F(2, 3), F(5, 3), F(2, 3)]
    assert cert.final_disks.radii == [F(2, 3), F(2, 3), F(2, 3)]
    assert is_psd_exact(assemble(STRATEGY)).verdict == "PSD"


def test_recipe_explicit_schedule_matches_greedy_here():
    schedule = [(SubsetIndex(0b11, 2), SubsetIndex(0b01, 2))]
    cert = certify_recipe(STRATEGY, schedule=schedule)
    assert cert.verdict == "PSD" and cert.recipe_conclusive
    assert cert.final_disks.centers == [F(2, 3), F(5, 3), F(2, 3)]


def test_recipe_falls_back_to_the_oracle():
    form = decompose(INDEFINITE, 1)
    cert = certify_recipe(form)
    assert cert.verdict == "NotPSD"
    assert not cert.recipe_conclusive
    assert cert.method == "exact-factorization"
    assert quad_eval(assemble(form), cert.witness) < 0


def test_recipe_verdicts_match_the_oracle_on_random_forms():
    rng = random.Random(59)
    for trial in range(25):
        form = random_form(rng.randint(2, 3), 1, rng)
        cert = certify_recipe(form)
        oracle = is_psd_exact(assemble(form))
        if cert.recipe_conclusive:
            # a conclusive disk pass is a soundness claim, never a refutation
            assert cert.verdict == "PSD"
            assert oracle.verdict == "PSD"
        else:
            assert cert.verdict == oracle.verdict


def test_recipe_output_is_deterministic():
    a = certify_recipe(STRATEGY).to_json_dict(include_trace=True)
    b = certify_recipe(STRATEGY).to_json_dict(include_trace=True)
    assert a == b


def test_certificate_json_shape():
    data = certify_recipe(STRATEGY).to_json_dict()
    assert set(data) == {"verdict", "method", "schedule", "final_disks"}
    assert data["final_disks"][0] == {
        "row": "{}",
        "center": "2/3",
        "radius": "2/3",
    }
