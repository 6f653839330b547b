import json
import math
from pathlib import Path

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sustkit.polynomials import (
    FAMILY_VARIANTS,
    ZERO_TOL,
    ArityMismatchError,
    SolutionFamily,
    SparsePolynomial,
    build_solution,
    diffusion_residual,
    interaction_residual,
    verify_solution_families,
)

DATA = Path(__file__).parent / "data"


# -- independent oracle: rebuild residuals symbolically with sympy ------------


def _to_sympy(p: SparsePolynomial):
    t = sympy.Symbol("t")
    psis = sympy.symbols(f"psi1:{p.arity + 1}")
    expr = sympy.Integer(0)
    for exps, c in p.terms.items():
        term = sympy.Float(c, 30) * t ** exps[0]
        for sym, e in zip(psis, exps[1:]):
            term *= sym**e
        expr += term
    return expr, t, psis


def sympy_diffusion_residual(p: SparsePolynomial):
    expr, t, psis = _to_sympy(p)
    res = sympy.diff(expr, t) - sum(sympy.diff(expr, s, 2) for s in psis)
    return sympy.expand(res)


def sympy_interaction_residual(p: SparsePolynomial):
    expr, t, psis = _to_sympy(p)
    k = p.arity
    res = sympy.diff(expr, t) - sum(sympy.diff(expr, s, k) for s in psis)
    res -= sympy.diff(expr, *psis)
    return sympy.expand(res)


def _assert_matches_sympy(mine: SparsePolynomial, oracle_expr) -> None:
    expr, t, psis = _to_sympy(mine)
    diff = sympy.expand(expr - oracle_expr)
    poly = sympy.Poly(diff, t, *psis) if diff != 0 else None
    worst = max((abs(float(c)) for c in poly.coeffs()), default=0.0) if poly else 0.0
    assert worst < 1e-9, f"disagrees with sympy oracle by {worst}"


# -- arithmetic ---------------------------------------------------------------


def test_partial_power_rule():
    p = SparsePolynomial.monomial((0, 2), 1.0)  # psi1^2, k=1
    assert p.partial(1) == SparsePolynomial.monomial((0, 1), 2.0)


def test_partial_product_variables():
    p = SparsePolynomial.monomial((0, 1, 1), 1.0)  # psi1*psi2, k=2
    assert p.partial(2) == SparsePolynomial.monomial((0, 1, 0), 1.0)


def test_eval_simple():
    p = SparsePolynomial(1, {(1, 0): 1.0, (0, 2): 1.0})  # t + psi1^2
    assert p([1.0, 2.0]) == 5.0


def test_add_mul_scalar():
    a = SparsePolynomial(1, {(1, 0): 2.0})
    b = SparsePolynomial(1, {(0, 1): 3.0})
    s = a + b
    assert s.terms == {(1, 0): 2.0, (0, 1): 3.0}
    assert (2 * a).terms == {(1, 0): 4.0}
    prod = a * b
    assert prod.terms == {(1, 1): 6.0}


def test_zero_coefficients_dropped():
    p = SparsePolynomial(1, {(1, 0): 1.0}) - SparsePolynomial(1, {(1, 0): 1.0})
    assert p.terms == {}
    assert p.is_zero()


def test_arity_mismatch_raises():
    a = SparsePolynomial(1, {(1, 0): 1.0})
    b = SparsePolynomial(2, {(1, 0, 0): 1.0})
    with pytest.raises(ArityMismatchError):
        _ = a + b
    with pytest.raises(ArityMismatchError):
        _ = a * b
    with pytest.raises(ArityMismatchError):
        a([1.0, 2.0, 3.0])


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        SparsePolynomial(1, {(0, -1): 1.0})


@settings(deadline=None, max_examples=100)
@given(
    terms=st.dictionaries(
        st.tuples(*(st.integers(0, 3) for _ in range(4))),
        st.floats(-10, 10, allow_nan=False),
        min_size=1,
        max_size=6,
    ),
    i=st.integers(1, 3),
    j=st.integers(1, 3),
)
def test_partials_commute(terms, i, j):
    p = SparsePolynomial(3, terms)
    assert p.partial(i).partial(j) == p.partial(j).partial(i)


# -- closed forms -------------------------------------------------------------


def test_t1a_value():
    h = build_solution(SolutionFamily("T1a", 2))
    assert h([1.0, 0.0, 0.0]) == 2.0


def test_t2a_value():
    h = build_solution(SolutionFamily("T2a", 2))
    assert h([0.0, 1.0, 1.0]) == pytest.approx(2.0, abs=1e-15)


def test_t3w_value():
    h = build_solution(SolutionFamily("T3w", 2, weights=(1.0, 1.0)))
    assert h([1.0, 0.0, 0.0]) == 5.0


@pytest.mark.parametrize("variant", ["T1a", "T1b"])
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_diffusion_families_solve_their_model(variant, k):
    res = diffusion_residual(build_solution(SolutionFamily(variant, k)))
    assert res.is_zero()


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_interaction_families_solve_their_model(k):
    weights = tuple(0.3 + 0.4 * i for i in range(k))
    fams = [
        SolutionFamily("T2a", k),
        SolutionFamily("T2b", k),
        SolutionFamily("C_ab", k, alpha=0.7, beta=1.9),
        SolutionFamily("T3w", k, weights=weights),
        SolutionFamily("C1w", k, weights=weights),
        SolutionFamily("C2w_ab", k, alpha=1.3, beta=0.4, weights=weights),
    ]
    for fam in fams:
        res = interaction_residual(build_solution(fam))
        assert res.is_zero(), f"{fam.variant} k={k}: max coeff {res.max_abs_coeff()}"


@pytest.mark.parametrize("k", [2, 3])
def test_residuals_match_sympy_oracle(k):
    weights = tuple(0.5 * (i + 1) for i in range(k))
    cases = [
        build_solution(SolutionFamily("T2a", k)),
        build_solution(SolutionFamily("T3w", k, weights=weights)),
        build_solution(SolutionFamily("C_ab", k, alpha=0.9, beta=1.4)),
        SparsePolynomial(k, {(2,) + (0,) * k: 1.0}),  # t^2, a non-solution
    ]
    for h in cases:
        _assert_matches_sympy(interaction_residual(h), sympy_interaction_residual(h))
        _assert_matches_sympy(diffusion_residual(h), sympy_diffusion_residual(h))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_residuals_of_random_polynomials_match_sympy(seed):
    import random

    rng = random.Random(seed)
    k = 3
    terms = {
        tuple(rng.randint(0, 3) for _ in range(k + 1)): rng.uniform(-4.0, 4.0)
        for _ in range(6)
    }
    h = SparsePolynomial(k, terms)
    _assert_matches_sympy(diffusion_residual(h), sympy_diffusion_residual(h))
    _assert_matches_sympy(interaction_residual(h), sympy_interaction_residual(h))


def test_t_squared_is_not_a_diffusion_solution():
    h = SparsePolynomial(1, {(2, 0): 1.0})  # t^2
    res = diffusion_residual(h)
    assert res.terms == {(1, 0): 2.0}  # residual 2t


def test_t3w_uneven_weights_solve_interaction_model():
    h = build_solution(SolutionFamily("T3w", 2, weights=(0.5, 2.0)))
    assert interaction_residual(h).is_zero()


def test_t1a_does_not_solve_interaction_model_for_k3():
    # T1a solves the diffusion model; against the interaction model at k=3
    # its psi-terms drop out entirely and the residual is the constant k
    # (confirmed by the sympy oracle above).
    h = build_solution(SolutionFamily("T1a", 3))
    res = interaction_residual(h)
    assert not res.is_zero()
    assert res.terms == {(0, 0, 0, 0): 3.0}
    _assert_matches_sympy(res, sympy_interaction_residual(h))


def test_t1b_k3_solves_diffusion():
    res = diffusion_residual(build_solution(SolutionFamily("T1b", 3)))
    assert res.is_zero()


# -- reduction identities (exact term maps) -----------------------------------


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_t3w_unit_weights_equals_t2b(k):
    ones = (1.0,) * k
    assert build_solution(SolutionFamily("T3w", k, weights=ones)) == build_solution(
        SolutionFamily("T2b", k)
    )


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_c1w_unit_weights_equals_t2a(k):
    ones = (1.0,) * k
    assert build_solution(SolutionFamily("C1w", k, weights=ones)) == build_solution(
        SolutionFamily("T2a", k)
    )


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_c2w_ab_unit_parameters_equals_t3w(k):
    weights = tuple(0.2 + 0.3 * i for i in range(k))
    assert build_solution(
        SolutionFamily("C2w_ab", k, alpha=1.0, beta=1.0, weights=weights)
    ) == build_solution(SolutionFamily("T3w", k, weights=weights))


# -- stated time coefficients --------------------------------------------------


@pytest.mark.parametrize("k", [2, 3, 4])
def test_dt_coefficient_matches_stated_value(k):
    weights = tuple(0.4 + 0.5 * i for i in range(k))
    alpha, beta = 1.3, 0.7
    fact = math.factorial(k)
    sum_w, prod_w = math.fsum(weights), math.prod(weights)
    cases = [
        (SolutionFamily("T1a", k), float(k)),
        (SolutionFamily("T1b", k), float(2 * k)),
        (SolutionFamily("T2a", k), float(k + 1)),
        (SolutionFamily("T2b", k), float(fact * k + 1)),
        (SolutionFamily("C_ab", k, alpha=alpha, beta=beta), k * alpha * fact + beta),
        (SolutionFamily("T3w", k, weights=weights), fact * sum_w + prod_w),
        (SolutionFamily("C1w", k, weights=weights), sum_w + prod_w),
        (
            SolutionFamily("C2w_ab", k, alpha=alpha, beta=beta, weights=weights),
            alpha * fact * sum_w + beta * prod_w,
        ),
    ]
    for fam, coeff in cases:
        dt = build_solution(fam).partial(0)
        assert dt.terms == {(0,) * (k + 1): pytest.approx(coeff, rel=1e-15)}, fam.variant


# -- the uncorrected two-parameter form ----------------------------------------


@pytest.mark.parametrize("k", [2, 3, 4])
def test_uncorrected_c_ab_residual_is_expected_constant(k):
    alpha, beta = 1.7, 0.6
    fam = SolutionFamily("C_ab", k, alpha=alpha, beta=beta, uncorrected=True)
    res = interaction_residual(build_solution(fam))
    expected = (k * alpha * math.factorial(k) + beta) - (k + 1)
    assert res.terms == {(0,) * (k + 1): pytest.approx(expected, rel=1e-12)}
    assert not res.is_zero()


def test_uncorrected_c_ab_vanishes_only_at_special_parameters():
    k = 3
    fam = SolutionFamily(
        "C_ab", k, alpha=1.0 / math.factorial(k), beta=1.0, uncorrected=True
    )
    assert interaction_residual(build_solution(fam)).is_zero()


# -- family validation ----------------------------------------------------------


def test_family_validation_errors():
    with pytest.raises(ValueError):
        SolutionFamily("nope", 2)
    with pytest.raises(ValueError):
        SolutionFamily("T2a", 1)  # mixed term needs k >= 2
    with pytest.raises(ValueError):
        SolutionFamily("C_ab", 2)  # alpha/beta missing
    with pytest.raises(ValueError):
        SolutionFamily("C_ab", 2, alpha=-1.0, beta=1.0)
    with pytest.raises(ValueError):
        SolutionFamily("T3w", 2, weights=(1.0,))  # wrong length
    with pytest.raises(ValueError):
        SolutionFamily("T3w", 2, weights=(1.0, 0.0))  # not strictly positive
    with pytest.raises(ValueError):
        SolutionFamily("T3w", 2, weights=(1.0, 1.0), uncorrected=True)


def test_verify_solution_families_all_pass():
    checks = verify_solution_families(k_values=(2, 3), draws=5, seed=7)
    assert all(c.ok for c in checks)
    variants = {c.variant for c in checks}
    assert set(FAMILY_VARIANTS) <= variants
    assert "C_ab(uncorrected)" in variants
    uncorrected = [c for c in checks if c.variant == "C_ab(uncorrected)"]
    assert all(c.max_residual_coeff > ZERO_TOL for c in uncorrected)


# -- serialisation ---------------------------------------------------------------


def test_json_round_trip():
    fam = SolutionFamily("C2w_ab", 3, alpha=1.2, beta=0.8, weights=(0.5, 1.0, 2.0))
    h = build_solution(fam)
    assert SparsePolynomial.loads(h.dumps()) == h


def test_golden_file_t3w_k3():
    h = build_solution(SolutionFamily("T3w", 3, weights=(0.5, 1.0, 2.0)))
    with open(DATA / "t3w_k3_weights_0.5_1_2.json") as fh:
        golden = SparsePolynomial.from_json_dict(json.load(fh))
    assert h == golden
