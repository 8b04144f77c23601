"""Runtime invariant suite covering every module's contract checks.

Each check recomputes one documented invariant from scratch and reports a
pass/fail with the observed deviation.  The grid-refinement checks carry
the ``grid-stability`` category: they are expected to degrade on coarse
grids, and the CLI can downgrade them to warnings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import besov, counterexample as ce, linalg, moi, reference


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    category: str = "core"


def _result(name, ok, detail, category="core"):
    return CheckResult(name=name, passed=bool(ok), detail=detail, category=category)


def _random_measure(rng, dim, n_atoms) -> linalg.SpectralMeasure:
    n_atoms = min(n_atoms, dim)
    U = linalg.random_unitary(rng, dim)
    cuts = (
        sorted(rng.choice(np.arange(1, dim), size=n_atoms - 1, replace=False))
        if n_atoms > 1
        else []
    )
    bounds = [0, *cuts, dim]
    values = np.sort(rng.uniform(-3.0, 3.0, size=n_atoms))
    atoms = tuple(
        linalg.SpectralAtom(float(v), U[:, lo:hi])
        for v, lo, hi in zip(values, bounds[:-1], bounds[1:])
    )
    return linalg.SpectralMeasure(atoms)


def _complex_gaussian(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


# ---------------------------------------------------------------- linalg


def check_spectral_resolution(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        dim = int(rng.integers(2, 17))
        A = linalg.random_hermitian(rng, dim)
        E = linalg.spectral_measure(A)
        worst = max(worst, E.deviations(A)["reconstruction"])
    return _result(
        "linalg.spectral_resolution", worst <= 1e-10, f"max dev {worst:.3e} (tol 1e-10)"
    )


def check_projection_algebra(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(10):
        dim = int(rng.integers(2, 17))
        E = linalg.spectral_measure(linalg.random_hermitian(rng, dim))
        projections = E.projections()
        total = np.zeros((dim, dim), dtype=complex)
        for i, P in enumerate(projections):
            total += P
            for j, Q in enumerate(projections):
                expect = P if i == j else 0.0
                worst = max(worst, float(np.max(np.abs(P @ Q - expect))))
        worst = max(worst, float(np.max(np.abs(total - np.eye(dim)))))
    return _result(
        "linalg.projection_algebra", worst <= 1e-10, f"max dev {worst:.3e} (tol 1e-10)"
    )


def check_schatten_monotonicity(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 2)
    grid = [1.0, 1.3, 2.0, 2.7, 4.0, math.inf]
    worst = -math.inf
    for _ in range(20):
        M = _complex_gaussian(rng, int(rng.integers(2, 9)), int(rng.integers(2, 9)))
        norms = [linalg.schatten_norm(M, p) for p in grid]
        for smaller, larger in zip(norms[1:], norms[:-1]):
            worst = max(worst, smaller - larger)
    return _result(
        "linalg.schatten_monotonicity",
        worst <= 1e-12,
        f"max increase {worst:.3e} (tol 1e-12)",
    )


def check_unitary_invariance(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for _ in range(15):
        dim = int(rng.integers(2, 9))
        M = _complex_gaussian(rng, dim, dim)
        U = linalg.random_unitary(rng, dim)
        V = linalg.random_unitary(rng, dim)
        for p in (1.0, 2.0, 3.5, math.inf):
            worst = max(
                worst,
                abs(
                    linalg.schatten_norm(U @ M @ V, p) - linalg.schatten_norm(M, p)
                ),
            )
    return _result(
        "linalg.unitary_invariance", worst <= 1e-10, f"max dev {worst:.3e} (tol 1e-10)"
    )


def check_frobenius_identity(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 4)
    worst = 0.0
    for _ in range(20):
        M = _complex_gaussian(rng, int(rng.integers(2, 9)), int(rng.integers(2, 9)))
        worst = max(
            worst,
            abs(linalg.schatten_norm(M, 2.0) ** 2 - float(np.sum(np.abs(M) ** 2))),
        )
    return _result(
        "linalg.frobenius_identity", worst <= 1e-10, f"max dev {worst:.3e} (tol 1e-10)"
    )


def check_finite_rank_chain(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 5)
    worst = -math.inf
    for _ in range(50):
        dim = int(rng.integers(3, 13))
        rank = int(rng.integers(1, dim + 1))
        M = _complex_gaussian(rng, dim, rank) @ _complex_gaussian(rng, rank, dim)
        for p in (2.0, 3.0, 4.0, math.inf):
            inv_p = 0.0 if math.isinf(p) else 1.0 / p
            gap = linalg.schatten_norm(M, 2.0) - rank ** (0.5 - inv_p) * linalg.schatten_norm(M, p)
            worst = max(worst, gap)
    return _result(
        "linalg.finite_rank_chain",
        worst <= 1e-12,
        f"max excess {worst:.3e} (tol 1e-12)",
    )


# ------------------------------------------------------------------- moi


def check_resolution_collapse(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for _ in range(15):
        dim = int(rng.integers(2, 9))
        E1 = _random_measure(rng, dim, int(rng.integers(1, 6)))
        E2 = _random_measure(rng, dim, int(rng.integers(1, 6)))
        T = _complex_gaussian(rng, dim, dim)
        first_only = lambda x, y: np.exp(1j * x) + 0.0 * y
        lhs = moi.double_operator_integral(first_only, E1, T, E2)
        rhs = moi.apply_function_single(lambda x: np.exp(1j * x), E1) @ T
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return _result(
        "moi.resolution_collapse", worst <= 1e-10, f"max dev {worst:.3e} (tol 1e-10)"
    )


def check_diagonal_policy_independence(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 7)
    worst = 0.0
    for _ in range(15):
        dim = int(rng.integers(2, 8))
        # overlapping spectra: share eigenvalues through a common diagonal
        shared = np.sort(rng.uniform(-2.0, 2.0, size=dim))
        Q = linalg.random_unitary(rng, dim)
        A = linalg.hermitian_from_matrix((Q * shared) @ Q.conj().T)
        B = linalg.hermitian_from_matrix(np.diag(shared).astype(complex))
        f = lambda t: t**3 - t
        one = moi.perturbation_via_divided_difference(f, A, B, diagonal_value=0.0)
        other = moi.perturbation_via_divided_difference(f, A, B, diagonal_value=7.5 - 2j)
        worst = max(worst, float(np.max(np.abs(one - other))))
        worst = max(
            worst,
            float(
                np.max(
                    np.abs(moi.perturbation_via_divided_difference(f, A, A, diagonal_value=3.0))
                )
            ),
        )
    return _result(
        "moi.diagonal_policy_independence",
        worst <= 1e-12,
        f"max dev {worst:.3e} (tol 1e-12)",
    )


def _poly(coeffs):
    def g(t):
        total = np.zeros_like(np.asarray(t, dtype=complex))
        for c in coeffs:
            total = total * t + c
        return total

    return g


def check_single_slot_exactness(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 8)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 11))
        A = linalg.random_hermitian(rng, dim)
        B = linalg.random_hermitian(rng, dim)
        functions = [
            _poly(rng.uniform(-1.0, 1.0, size=int(rng.integers(2, 6)))),
            lambda t: np.exp(1j * t),
        ]
        for f in functions:
            lhs = moi.perturbation_via_divided_difference(f, A, B)
            rhs = moi.apply_function_single(f, linalg.spectral_measure(A)) - \
                moi.apply_function_single(f, linalg.spectral_measure(B))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return _result(
        "moi.single_slot_exactness", worst <= 1e-9, f"max dev {worst:.3e} (tol 1e-9)"
    )


def check_triple_slot_exactness(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 9)
    worst = 0.0
    functions = [
        lambda x, y, z: np.sin(x) * np.cos(y) + z,
        lambda x, y, z: (x - y) * z + x * y,
        lambda x, y, z: np.exp(1j * (x + y - z)),
    ]
    for trial in range(100):
        dim = int(rng.integers(2, 11))
        X1, X2, Y, Z = (linalg.random_hermitian(rng, dim) for _ in range(4))
        f = functions[trial % len(functions)]
        for index in (0, 1, 2):
            lhs = moi.argument_perturbation(f, index, X1, X2, Y, Z)
            args1 = [Y, Z]
            args1.insert(index, X1)
            args2 = [Y, Z]
            args2.insert(index, X2)
            rhs = moi.apply_function_triple(f, *args1) - moi.apply_function_triple(
                f, *args2
            )
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return _result(
        "moi.triple_slot_exactness", worst <= 1e-9, f"max dev {worst:.3e} (tol 1e-9)"
    )


def check_commuting_diagonal(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 10)
    worst = 0.0
    f = lambda x, y, z: np.cos(x) * y + z**2
    for _ in range(15):
        dim = int(rng.integers(2, 9))
        diags = [np.sort(rng.uniform(-2.0, 2.0, size=dim)) for _ in range(3)]
        ops = [
            linalg.hermitian_from_matrix(np.diag(d).astype(complex)) for d in diags
        ]
        out = moi.apply_function_triple(f, *ops)
        expected = np.diag(f(diags[0], diags[1], diags[2]).astype(complex))
        worst = max(worst, float(np.max(np.abs(out - expected))))
    return _result(
        "moi.commuting_diagonal", worst <= 1e-12, f"max dev {worst:.3e} (tol 1e-12)"
    )


def check_naive_oracle_equivalence(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 11)
    worst = 0.0
    phi = lambda x, y, z: np.exp(1j * (x - 2.0 * y)) + x * z
    for _ in range(50):
        dim = int(rng.integers(3, 9))
        E1, E2, E3 = (_random_measure(rng, dim, int(rng.integers(1, 6))) for _ in range(3))
        T1 = _complex_gaussian(rng, dim, dim)
        T2 = _complex_gaussian(rng, dim, dim)
        fast = moi.triple_operator_integral(phi, E1, T1, E2, T2, E3)
        slow = reference.naive_triple_operator_integral(phi, E1, T1, E2, T2, E3)
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    return _result(
        "moi.naive_oracle_equivalence",
        worst <= 1e-10,
        f"max dev {worst:.3e} (tol 1e-10)",
    )


# ----------------------------------------------------------------- besov


def check_window_equation() -> CheckResult:
    s = np.linspace(1.0, 2.0, 10_000)
    dev = float(np.max(np.abs(besov.window_w(s) - 1.0 + besov.window_w(s / 2.0))))
    return _result(
        "besov.window_equation", dev <= 1e-12, f"max dev {dev:.3e} (tol 1e-12)"
    )


def check_partition_of_unity() -> CheckResult:
    s = np.logspace(-10, 10, 1000, base=2.0)
    dev = float(np.max(np.abs(besov.partition_check(s) - 1.0)))
    return _result(
        "besov.partition_of_unity", dev <= 1e-10, f"max dev {dev:.3e} (tol 1e-10)"
    )


def check_band_support(grid_half_width: float, grid_log2_size: int) -> CheckResult:
    psi = besov.psi_reference_grid(grid_half_width, grid_log2_size)
    freqs = np.abs(psi.frequencies())
    worst = 0.0
    top = besov.max_resolvable_band(psi)
    for n in range(0, top + 1):
        piece = besov.band_piece(psi, n)
        spectrum = np.abs(np.fft.fft(piece.samples))
        peak = float(np.max(spectrum))
        if peak == 0.0:
            continue
        outside = (freqs < 2.0 ** (n - 1)) | (freqs > 2.0 ** (n + 1))
        leak = float(np.max(spectrum[outside])) / peak if np.any(outside) else 0.0
        worst = max(worst, leak)
    return _result(
        "besov.band_support", worst <= 1e-12, f"max relative leak {worst:.3e} (tol 1e-12)"
    )


def check_summability_tail(grid_half_width: float, grid_log2_size: int) -> CheckResult:
    coarse = besov.psi_reference_grid(grid_half_width, grid_log2_size)
    fine = besov.psi_reference_grid(grid_half_width, grid_log2_size + 1)
    top_coarse = besov.max_resolvable_band(coarse)
    top_fine = besov.max_resolvable_band(fine)
    weighted = [
        (2.0**n) * besov.band_piece(fine, n).sup_norm()
        for n in range(0, top_fine + 1)
    ]
    tail = sum(weighted[top_coarse + 1 :])
    total = besov.psi_band_majorant(fine)
    fraction = tail / total
    decaying = all(
        weighted[i + 1] <= weighted[i] or weighted[i + 1] < 1e-12
        for i in range(3, len(weighted) - 1)
    )
    return _result(
        "besov.summability_tail",
        fraction < 0.01 and decaying,
        f"tail fraction {fraction:.3e} (tol 1e-2), weighted sups decay: {decaying}",
        category="grid-stability",
    )


def check_surrogate_refinement(grid_half_width: float, grid_log2_size: int) -> CheckResult:
    coarse = besov.psi_band_majorant(
        besov.psi_reference_grid(grid_half_width, grid_log2_size)
    )
    fine = besov.psi_band_majorant(
        besov.psi_reference_grid(grid_half_width, grid_log2_size + 1)
    )
    rel = abs(fine - coarse) / coarse
    return _result(
        "besov.surrogate_refinement",
        rel < 0.02,
        f"majorant {coarse:.6f} -> {fine:.6f}, rel change {rel:.3e} (tol 2e-2)",
        category="grid-stability",
    )


# -------------------------------------------------------- counterexample


def check_exact_blowup(
    N_list: Sequence[int],
    p_list: Sequence[float],
    grid_half_width: float,
    grid_log2_size: int,
) -> CheckResult:
    psi_grid = besov.psi_reference_grid(grid_half_width, grid_log2_size)
    worst = 0.0
    for N in N_list:
        for record in ce.growth_records(N, p_list, psi_grid=psi_grid):
            worst = max(worst, abs(record.ratio - math.sqrt(N)) / math.sqrt(N))
    return _result(
        "counterexample.exact_blowup",
        worst <= 1e-8,
        f"max relative ratio error {worst:.3e} (tol 1e-8)",
    )


def check_factorization_identity(N_list: Sequence[int]) -> CheckResult:
    worst = 0.0
    for N in N_list:
        inst = ce.build_instance(N)
        diff = moi.apply_function_triple(inst.f, inst.A, inst.B, inst.C) - \
            moi.apply_function_triple(inst.f, inst.A, inst.B, linalg.zero_operator(N))
        target = moi.apply_function_pair(inst.phi, inst.A, inst.B) @ inst.C.matrix
        worst = max(worst, float(np.max(np.abs(diff - target))))
    return _result(
        "counterexample.factorization_identity",
        worst <= 1e-10,
        f"max dev {worst:.3e} (tol 1e-10)",
    )


def check_rank_one_collapse(N_list: Sequence[int]) -> CheckResult:
    ok = True
    details = []
    for N in N_list:
        inst = ce.build_instance(N)
        s = linalg.singular_values(moi.apply_function_pair(inst.phi, inst.A, inst.B))
        above = int(np.count_nonzero(s > 1e-10 * math.sqrt(N)))
        top_err = abs(s[0] - math.sqrt(N)) / math.sqrt(N)
        ok = ok and above == 1 and top_err <= 1e-8
        details.append(f"N={N}: {above} above floor, top rel err {top_err:.2e}")
    return _result("counterexample.rank_one_collapse", ok, "; ".join(details))


def check_gram_fidelity(N_list: Sequence[int]) -> CheckResult:
    worst = 0.0
    for N in N_list:
        worst = max(worst, ce.build_instance(N).deviations()["gram"])
    return _result(
        "counterexample.gram_fidelity", worst <= 1e-12, f"max dev {worst:.3e} (tol 1e-12)"
    )


def check_bounded_symbol() -> CheckResult:
    sups = [
        ce.phi_grid_sup(ce.build_instance(N).phi, N) for N in (4, 8, 16, 32, 64)
    ]
    spread = max(sups) / min(sups) - 1.0
    return _result(
        "counterexample.bounded_symbol",
        spread < 0.10,
        f"sup range [{min(sups):.6f}, {max(sups):.6f}], spread {spread:.3e} (tol 0.1)",
    )


def check_bounded_surrogate(grid_half_width: float, grid_log2_size: int) -> CheckResult:
    psi_grid = besov.psi_reference_grid(grid_half_width, grid_log2_size)
    values = [
        besov.tensor_bound_kappa(
            ce.phi_grid_sup(ce.build_instance(N).phi, N), psi_grid
        )
        for N in (2, 4, 8, 16, 32, 64)
    ]
    spread = max(values) / min(values) - 1.0
    return _result(
        "counterexample.bounded_surrogate",
        spread < 0.10,
        f"surrogate range [{min(values):.4f}, {max(values):.4f}], spread {spread:.3e} (tol 0.1)",
    )


def check_lipschitz_bound(trials: int, seed: int) -> CheckResult:
    ok = True
    worst_ratio = 0.0
    for N in (2, 3):
        for p in (1.0, 2.0, math.inf):
            report = ce.lipschitz_rank_bound_check(N, p, trials=trials, seed=seed)
            ok = ok and report.all_passed
            worst_ratio = max(worst_ratio, report.max_ratio)
    return _result(
        "counterexample.lipschitz_bound",
        ok,
        f"all trials within bound, max lhs/bound ratio {worst_ratio:.3e}",
    )


def check_pairs_chain(trials: int, seed: int) -> CheckResult:
    ok = True
    worst_ratio = 0.0
    for p in (2.0, 3.0, math.inf):
        report = ce.rank_estimate_check_pairs(4, p, trials=trials, seed=seed)
        ok = ok and report.all_passed
        worst_ratio = max(worst_ratio, report.max_ratio)
    return _result(
        "counterexample.pairs_chain",
        ok,
        f"chain inequalities hold, max normalized ratio {worst_ratio:.3e}",
    )


DEFAULT_BLOWUP_N = (1, 2, 4, 8, 16, 32, 64)
DEFAULT_BLOWUP_P = (1.0, 1.5, 2.0, 3.0, math.inf)


def run_selfcheck(
    N_list: Sequence[int] = DEFAULT_BLOWUP_N,
    p_list: Sequence[float] = DEFAULT_BLOWUP_P,
    seed: int = ce.DEFAULT_SEED,
    grid_half_width: float = besov.DEFAULT_HALF_WIDTH,
    grid_log2_size: int = besov.DEFAULT_LOG2_SAMPLES,
    trials: int = 25,
) -> list[CheckResult]:
    """Run every invariant check and return the results in a fixed order."""
    small_N = tuple(n for n in N_list if n <= 16) or tuple(N_list[:1])
    return [
        check_spectral_resolution(seed),
        check_projection_algebra(seed),
        check_schatten_monotonicity(seed),
        check_unitary_invariance(seed),
        check_frobenius_identity(seed),
        check_finite_rank_chain(seed),
        check_resolution_collapse(seed),
        check_diagonal_policy_independence(seed),
        check_single_slot_exactness(seed),
        check_triple_slot_exactness(seed),
        check_commuting_diagonal(seed),
        check_naive_oracle_equivalence(seed),
        check_window_equation(),
        check_partition_of_unity(),
        check_band_support(grid_half_width, grid_log2_size),
        check_summability_tail(grid_half_width, grid_log2_size),
        check_surrogate_refinement(grid_half_width, grid_log2_size),
        check_exact_blowup(N_list, p_list, grid_half_width, grid_log2_size),
        check_factorization_identity(small_N),
        check_rank_one_collapse(small_N),
        check_gram_fidelity(small_N),
        check_bounded_symbol(),
        check_bounded_surrogate(grid_half_width, grid_log2_size),
        check_lipschitz_bound(trials, seed),
        check_pairs_chain(trials, seed),
    ]
