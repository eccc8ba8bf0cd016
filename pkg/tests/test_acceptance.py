"""Acceptance gate: one line per criterion, each at its documented tolerance."""

import pytest

from osculate import verify

# criterion -> (tolerance per check, short statement)
CRITERIA = {
    1: ({"third_law_constant": 1e-12, "third_law_ratio": 1e-12}, "Kepler third law"),
    2: ({"second_law_area_rate": 1e-10}, "Kepler second law, ecc 0.6, 10 periods"),
    3: (
        {
            "conservation_energy": 1e-9,
            "conservation_angular_momentum": 1e-9,
            "conservation_eccentricity_vector": 1e-9,
        },
        "first integrals over 10 periods",
    ),
    4: ({"flow_composition": 1e-8}, "flow composition law"),
    5: ({"chart_round_trip": 1e-9}, "chart round trip"),
    6: ({"duality_analytic": 1e-10, "duality_kepler": 1e-4}, "Lagrange/Poisson duality"),
    7: (
        {"time_independence_kepler": 1e-4, "time_independence_oscillator": 1e-9},
        "time independence of parentheses",
    ),
    8: ({"flow_symplecticity": 1e-5}, "flow symplecticity"),
    9: ({"jacobi_identity": 1e-5}, "Jacobi identity"),
    10: (
        {"poisson_theorem_H_Lz": 1e-5, "poisson_theorem_Lx_Ly": 1e-5, "poisson_theorem_H_ex": 1e-5},
        "Poisson theorem",
    ),
    11: ({"rate_form_equivalence": 1e-8}, "rate-form equivalence"),
    12: (
        {"exactness_inverse_square": 1e-6, "exactness_rotating_dipole": 1e-6},
        "exactness of variation of constants",
    ),
    13: ({"apsidal_precession": 0.02}, "apsidal precession vs closed form"),
    14: ({"no_secular_sma": 1e-6}, "no secular sma drift"),
    15: ({"hamilton_equation": 1e-6}, "Hamilton's equation via brackets"),
}


def test_registry_matches_criteria():
    registered = {c.name: (c.criterion, c.tolerance) for c in verify.CHECKS}
    expected = {n: (k, tol) for k, (checks, _) in CRITERIA.items() for n, tol in checks.items()}
    assert registered == expected


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion, capsys):
    checks, statement = CRITERIA[criterion]
    results = [verify.run_check(name) for name in checks]
    ok = all(r.passed for r in results)
    detail = ", ".join(f"{r.name}={r.value:.3e} (tol {r.tolerance:.0e})" for r in results)
    with capsys.disabled():
        print(f"\nCRITERION {criterion:>2} {'PASS' if ok else 'FAIL'}: {statement}: {detail}")
    for r in results:
        assert r.value < checks[r.name], f"{r.name}: {r.value:.3e} >= {checks[r.name]:.0e}"
