"""The square-root-of-N growth family and rank-based norm estimates.

Builds, for each size N, a triple of N x N Hermitian operators (A, B, C)
and a bandlimited symbol phi such that the three-variable function
f(x, y, z) = phi(x, y) psi(z) produces

    ||f(A, B, C) - f(A, B, 0)||_{S_p} = sqrt(N) * ||C||_{S_p}

for every Schatten index p, while the uniform norm of phi and the
smoothness surrogate of f stay bounded in N.  A and B have the integer
lattice spectra {2 pi j}, their eigenvector systems realize a unitary DFT
Gram matrix, and C is the rank-one averaging projection; the interaction
collapses phi(A, B) to a single rank-one term of norm sqrt(N).

The module also provides empirical checks of two rank-based estimates for
functions of operator tuples: the Hilbert-Schmidt vs S_p chain for pairs
(rate N^(1/2 - 1/p)) and the N^4 Lipschitz-type bound for triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .besov import GridFunction, psi_reference, psi_reference_grid, tensor_bound_kappa, window_w
from .linalg import (
    HermitianOperator,
    as_complex_matrix,
    hermitian_from_matrix,
    numerical_rank,
    random_unitary,
    schatten_norm,
    validate_schatten_index,
    zero_operator,
)
from .moi import apply_function_pair, apply_function_triple


class NotUnitaryError(ValueError):
    """Matrix expected to be unitary."""


class InvalidEpsilonError(ValueError):
    """Scaling factor must lie in (0, 1]."""


DEFAULT_SEED = 20240501

_ETA_SWITCH = 1e-2


def eta(x):
    """2(1 - cos x) / x^2 with the removable singularity filled in.

    Even, equals 1 at 0, vanishes to second order at every nonzero multiple
    of 2 pi, and is bandlimited to [-1, 1].  Below |x| = 1e-2 the even
    Taylor polynomial is used to dodge the 1 - cos cancellation; the seam
    mismatch is far below machine precision.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    sq = arr * arr
    series = 1.0 + sq * (-1.0 / 12.0 + sq * (1.0 / 360.0 - sq / 20160.0))
    small = np.abs(arr) <= _ETA_SWITCH
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = 2.0 * (1.0 - np.cos(arr)) / np.where(small, 1.0, sq)
    out = np.where(small, series, direct)
    if scalar:
        return float(out[0])
    return out


def dft_unitary(size: int) -> np.ndarray:
    """The unitary matrix (1/sqrt(size)) exp(2 pi i j k / size), 1-based j, k.

    The integer product j*k is reduced mod size before the complex
    exponential, so phases carry no drift at large sizes.
    """
    if size < 1:
        raise ValueError("size must be a positive integer")
    idx = np.arange(1, size + 1, dtype=np.int64)
    phase = (idx[:, None] * idx[None, :]) % size
    return np.exp((2j * math.pi / size) * phase) / math.sqrt(size)


def orthonormal_realization(unitary) -> tuple[np.ndarray, np.ndarray]:
    """Vector systems whose Gram matrix reproduces a given unitary.

    Returns (g, h) with rows g_j and h_k such that (h_k, g_j) = u_jk under
    the inner product (x, y) = sum x conj(y); concretely h_k is the k-th
    standard basis vector and g_j has coordinates conj(u_jk).  Both systems
    are orthonormal because the rows of a unitary are.

    Raises
    ------
    NotUnitaryError
        If U* U deviates from the identity by more than 1e-10.
    """
    U = as_complex_matrix(unitary)
    if U.shape[0] != U.shape[1]:
        raise NotUnitaryError(f"expected a square matrix, got shape {U.shape}")
    deviation = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if deviation > 1e-10:
        raise NotUnitaryError(f"|U*U - I|_max = {deviation:.3e} exceeds 1e-10")
    g = U.conj()
    h = np.eye(U.shape[0], dtype=np.complex128)
    return g, h


def phi_symbol(theta, size: int) -> Callable:
    """The bandlimited two-variable symbol
    sum over 1 <= j, k <= size of theta[j-1, k-1] eta(x - 2 pi j) eta(y - 2 pi k).

    The returned callable broadcasts.  Pairs are evaluated through a
    product table over the distinct x and y values and gathered back, so
    mesh arguments (atom grids, sup scans) cost two matrix products instead
    of a full pointwise sum.
    """
    theta = as_complex_matrix(theta)
    if theta.shape != (size, size):
        raise ValueError(f"theta must be {size} x {size}, got {theta.shape}")
    offsets = 2.0 * math.pi * np.arange(1, size + 1)

    def phi(x, y):
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(xa.shape, ya.shape)
        rows = eta(xa.reshape(-1)[:, None] - offsets)
        cols = eta(ya.reshape(-1)[:, None] - offsets)
        table = (rows.astype(np.complex128) @ theta) @ cols.T
        ix = np.broadcast_to(np.arange(xa.size).reshape(xa.shape), shape)
        iy = np.broadcast_to(np.arange(ya.size).reshape(ya.shape), shape)
        return table[ix, iy]

    return phi


@dataclass(frozen=True)
class CounterexampleInstance:
    """One size-N member of the growth family."""

    N: int
    U: np.ndarray
    theta: np.ndarray
    g_vectors: np.ndarray
    h_vectors: np.ndarray
    A: HermitianOperator
    B: HermitianOperator
    C: HermitianOperator
    phi: Callable
    f: Callable

    def deviations(self) -> dict[str, float]:
        """Max-entry deviations from the construction identities."""
        N = self.N
        eye = np.eye(N)
        gram = np.einsum("ki,ji->jk", self.h_vectors, self.g_vectors.conj())
        C = self.C.matrix
        return {
            "unitary": float(np.max(np.abs(self.U.conj().T @ self.U - eye))),
            "gram": float(np.max(np.abs(gram - self.U))),
            "g_orthonormal": float(
                np.max(np.abs(self.g_vectors @ self.g_vectors.conj().T - eye))
            ),
            "h_orthonormal": float(
                np.max(np.abs(self.h_vectors @ self.h_vectors.conj().T - eye))
            ),
            "c_norm": abs(schatten_norm(C, math.inf) - 1.0),
            "c_idempotent": float(np.max(np.abs(C @ C - C))),
            "c_trace": abs(float(np.trace(C).real) - 1.0),
        }


def build_instance(N: int) -> CounterexampleInstance:
    """Assemble the size-N operators, coefficients and symbols.

    A = sum 2 pi j (., g_j) g_j, B = sum 2 pi k (., h_k) h_k,
    C = (1/N)(., s) s with s the sum of the h_k, theta = sqrt(N) conj(U),
    and f(x, y, z) = phi(x, y) psi(z) with the reference cutoff psi.
    """
    U = dft_unitary(N)
    g, h = orthonormal_realization(U)
    theta = math.sqrt(N) * U.conj()

    weights = 2.0 * math.pi * np.arange(1, N + 1)
    A = hermitian_from_matrix(g.T @ (weights[:, None] * g.conj()))
    B = hermitian_from_matrix(np.diag(weights).astype(np.complex128))
    C = hermitian_from_matrix(np.full((N, N), 1.0 / N, dtype=np.complex128))

    phi = phi_symbol(theta, N)
    psi = psi_reference()

    def f(x, y, z):
        return phi(x, y) * psi(z)

    return CounterexampleInstance(
        N=N,
        U=U,
        theta=theta,
        g_vectors=g,
        h_vectors=h,
        A=A,
        B=B,
        C=C,
        phi=phi,
        f=f,
    )


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of a growth experiment."""

    N: int
    p: float
    lhs: float
    perturbation: float
    besov_surrogate: float
    ratio: float


def phi_grid_sup(
    phi: Callable, N: int, points_per_period: int = 32, chunk_rows: int = 512
) -> float:
    """Grid maximum of |phi| over [0, 2 pi (N+1)]^2.

    The scan is chunked along rows so the pairwise table never exceeds a
    few tens of megabytes.
    """
    points = (N + 1) * points_per_period + 1
    axis = np.linspace(0.0, 2.0 * math.pi * (N + 1), points)
    best = 0.0
    for start in range(0, points, chunk_rows):
        block = axis[start : start + chunk_rows]
        values = phi(block[:, None], axis[None, :])
        best = max(best, float(np.max(np.abs(values))))
    return best


def growth_records(
    N: int,
    p_list: Sequence[float],
    eps: float = 1.0,
    psi_grid: GridFunction | None = None,
    points_per_period: int = 32,
) -> list[ExperimentRecord]:
    """Growth experiment rows for one size and several Schatten indices.

    Computes D = f(A, B, eps*C) - f(A, B, 0) once through the triple
    calculus and reports ||D||_{S_p} / ||eps*C||_{S_p} per index.  Two
    construction identities are verified on the way (the base term
    vanishes because psi(0) = 0, and D equals phi(A, B) (eps C)); a failure
    there means an implementation bug, not an experimental outcome.
    """
    if not 0.0 < eps <= 1.0:
        raise InvalidEpsilonError(f"eps must lie in (0, 1], got {eps}")
    for p in p_list:
        validate_schatten_index(p)
    inst = build_instance(N)
    scaled_c = inst.C.scaled(eps)

    upper = apply_function_triple(inst.f, inst.A, inst.B, scaled_c)
    base = apply_function_triple(inst.f, inst.A, inst.B, zero_operator(N))
    diff = upper - base

    # written as not(<=) so a NaN from a broken symbol fails loudly
    base_peak = float(np.max(np.abs(base)))
    if not base_peak <= 1e-12 * math.sqrt(N):
        raise RuntimeError(
            f"zero-slot term should vanish, got |f(A,B,0)|_max = {base_peak:.3e}"
        )
    factored = apply_function_pair(inst.phi, inst.A, inst.B) @ scaled_c.matrix
    factor_dev = float(np.max(np.abs(diff - factored)))
    if not factor_dev <= 1e-10:
        raise RuntimeError(
            f"difference does not match phi(A,B) C: deviation {factor_dev:.3e}"
        )

    if psi_grid is None:
        psi_grid = psi_reference_grid()
    surrogate = tensor_bound_kappa(
        phi_grid_sup(inst.phi, N, points_per_period), psi_grid
    )

    records = []
    for p in p_list:
        lhs = schatten_norm(diff, p)
        perturbation = schatten_norm(scaled_c.matrix, p)
        records.append(
            ExperimentRecord(
                N=N,
                p=float(p),
                lhs=lhs,
                perturbation=perturbation,
                besov_surrogate=surrogate,
                ratio=lhs / perturbation,
            )
        )
    return records


def verify_growth(N: int, p: float, **kwargs) -> ExperimentRecord:
    """Single growth experiment row; the ratio equals sqrt(N) up to roundoff."""
    return growth_records(N, [p], **kwargs)[0]


def quarter_root_rule(N: int) -> float:
    """The vanishing scaling eps = N^(-1/4)."""
    return float(N) ** -0.25


def epsilon_scaling_run(
    N_list: Sequence[int],
    eps_rule: Callable[[int], float],
    p_list: Sequence[float] = (2.0,),
    **kwargs,
) -> list[ExperimentRecord]:
    """Growth rows with the third-slot perturbation shrunk by eps_rule(N).

    The difference norm is eps * sqrt(N) against a perturbation of size
    eps, so a rule like N^(-1/4) sends the perturbation to zero while the
    difference still diverges.

    Raises
    ------
    InvalidEpsilonError
        If the rule produces a value outside (0, 1].
    """
    records = []
    for N in N_list:
        eps = float(eps_rule(N))
        if not 0.0 < eps <= 1.0:
            raise InvalidEpsilonError(f"eps_rule({N}) = {eps} is outside (0, 1]")
        records.extend(growth_records(N, p_list, eps=eps, **kwargs))
    return records


def random_rank_limited_hermitian(
    rng: np.random.Generator, dim: int, rank: int
) -> HermitianOperator:
    """Q Lambda Q* with unitary Q and ``rank`` uniform(-1, 1) eigenvalues."""
    Q = random_unitary(rng, dim)
    values = np.zeros(dim)
    values[:rank] = rng.uniform(-1.0, 1.0, size=rank)
    return hermitian_from_matrix((Q * values) @ Q.conj().T)


def random_trig_polynomial(
    rng: np.random.Generator, max_degree: int = 3
) -> tuple[Callable, float]:
    """Random two-variable trigonometric polynomial plus a certified
    smoothness surrogate.

    Coefficients c_{ml} over |m|, |l| <= max_degree are complex Gaussian.
    Each frequency pair contributes to the dyadic bands selected by
    w(|(m, l)|_2 / 2^n), so the triangle inequality certifies
    sum_n 2^n sup|f_n| <= sum_n 2^n sum_{ml} |c_ml| w(...), which is the
    returned bound.  The constant term never enters (w vanishes at 0).
    """
    span = np.arange(-max_degree, max_degree + 1)
    coeffs = rng.standard_normal((span.size, span.size)) + 1j * rng.standard_normal(
        (span.size, span.size)
    )

    def f(x, y):
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        total = 0.0
        for i, m in enumerate(span):
            for j, l in enumerate(span):
                total = total + coeffs[i, j] * np.exp(1j * (m * xa + l * ya))
        return total

    radii = np.hypot(span[:, None], span[None, :])
    magnitudes = np.abs(coeffs)
    top_band = int(math.ceil(math.log2(max(float(np.max(radii)), 1.0)))) + 1
    bound = 0.0
    for n in range(0, top_band + 1):
        bound += (2.0**n) * float(np.sum(magnitudes * window_w(radii / 2.0**n)))
    return f, bound


def random_kink_function(
    rng: np.random.Generator, pieces: int = 3
) -> tuple[Callable, float]:
    """Random affine-plus-kinks function of three variables with a certified
    Lipschitz seminorm.

    f(v) = a0 + a . v + sum_m c_m min(1, |b_m . v + d_m|); the returned
    seminorm |a|_2 + sum |c_m| |b_m|_2 dominates the true one, so bounds
    asserted with it remain consequences of the underlying estimate.
    """
    a0 = rng.uniform(-1.0, 1.0)
    a = rng.uniform(-1.0, 1.0, size=3)
    c = rng.uniform(-1.0, 1.0, size=pieces)
    b = rng.uniform(-1.0, 1.0, size=(pieces, 3))
    d = rng.uniform(-1.0, 1.0, size=pieces)

    def f(x, y, z):
        total = a0 + a[0] * x + a[1] * y + a[2] * z
        for m in range(pieces):
            linear = b[m, 0] * x + b[m, 1] * y + b[m, 2] * z + d[m]
            total = total + c[m] * np.minimum(1.0, np.abs(linear))
        return total

    seminorm = float(np.linalg.norm(a) + np.sum(np.abs(c) * np.linalg.norm(b, axis=1)))
    return f, seminorm


@dataclass(frozen=True)
class PairsTrial:
    trial: int
    diff_norm_p: float
    diff_norm_2: float
    max_perturbation: float
    chain_ok: bool
    ratio: float


@dataclass(frozen=True)
class PairsCheckReport:
    N: int
    p: float
    trials: tuple[PairsTrial, ...]

    @property
    def all_passed(self) -> bool:
        return all(t.chain_ok for t in self.trials)

    @property
    def max_ratio(self) -> float:
        return max((t.ratio for t in self.trials), default=0.0)


def rank_estimate_check_pairs(
    N: int, p: float, trials: int, seed: int = DEFAULT_SEED
) -> PairsCheckReport:
    """Numerical check of the Hilbert-Schmidt chain behind the
    N^(1/2 - 1/p) estimate for pairs.

    For random rank-limited pairs and random trigonometric polynomials,
    asserts per trial that ||Df||_{S_p} <= ||Df||_{S_2} and that every
    rank-r difference satisfies ||X||_{S_2} <= r^(1/2 - 1/p) ||X||_{S_p},
    and reports the ratio of ||Df||_{S_p} to
    N^(1/2 - 1/p) * surrogate * max perturbation.

    Requires p >= 2 (the chain runs through the Hilbert-Schmidt norm).
    """
    p = validate_schatten_index(p)
    if p < 2.0:
        raise ValueError("rank_estimate_check_pairs requires p >= 2")
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    rng = np.random.default_rng(seed)
    dim = 2 * N
    rows = []
    for t in range(trials):
        A1 = random_rank_limited_hermitian(rng, dim, N)
        B1 = random_rank_limited_hermitian(rng, dim, N)
        A2 = random_rank_limited_hermitian(rng, dim, N)
        B2 = random_rank_limited_hermitian(rng, dim, N)
        f, surrogate = random_trig_polynomial(rng)

        diff = apply_function_pair(f, A1, B1) - apply_function_pair(f, A2, B2)
        norm_p = schatten_norm(diff, p)
        norm_2 = schatten_norm(diff, 2.0)
        ok = norm_p <= norm_2 + 1e-12

        max_perturbation = 0.0
        for X in (A1.matrix - A2.matrix, B1.matrix - B2.matrix):
            rank = numerical_rank(X)
            x_p = schatten_norm(X, p)
            x_2 = schatten_norm(X, 2.0)
            ok = ok and x_2 <= rank ** (0.5 - inv_p) * x_p + 1e-12
            max_perturbation = max(max_perturbation, x_p)

        denom = N ** (0.5 - inv_p) * surrogate * max_perturbation
        rows.append(
            PairsTrial(
                trial=t,
                diff_norm_p=norm_p,
                diff_norm_2=norm_2,
                max_perturbation=max_perturbation,
                chain_ok=ok,
                ratio=norm_p / denom if denom > 0 else 0.0,
            )
        )
    return PairsCheckReport(N=N, p=p, trials=tuple(rows))


@dataclass(frozen=True)
class LipschitzTrial:
    trial: int
    lhs: float
    bound: float
    steps_ok: bool
    total_ok: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.bound if self.bound > 0 else 0.0


@dataclass(frozen=True)
class LipschitzCheckReport:
    N: int
    p: float
    trials: tuple[LipschitzTrial, ...]

    @property
    def all_passed(self) -> bool:
        return all(t.total_ok and t.steps_ok for t in self.trials)

    @property
    def max_ratio(self) -> float:
        return max((t.ratio for t in self.trials), default=0.0)


def lipschitz_rank_bound_check(
    N: int, p: float, trials: int, seed: int = DEFAULT_SEED
) -> LipschitzCheckReport:
    """Numerical check of the N^4 Lipschitz-type bound for triples.

    Draws random rank-limited triples and kink test functions and asserts

        ||f(A1,B1,C1) - f(A2,B2,C2)||_{S_p}
            <= N^4 L (||dA||_{S_p} + ||dB||_{S_p} + ||dC||_{S_p}) + 1e-9

    together with the three telescoping one-slot steps it is assembled
    from.  A violation indicates an implementation bug, since the bound is
    a proven estimate.
    """
    p = validate_schatten_index(p)
    rng = np.random.default_rng(seed)
    dim = 2 * N
    slack = 1e-9
    rows = []
    for t in range(trials):
        first = tuple(random_rank_limited_hermitian(rng, dim, N) for _ in range(3))
        second = tuple(random_rank_limited_hermitian(rng, dim, N) for _ in range(3))
        f, seminorm = random_kink_function(rng)
        scale = N**4 * seminorm

        A1, B1, C1 = first
        A2, B2, C2 = second
        d_norms = [
            schatten_norm(X1.matrix - X2.matrix, p)
            for X1, X2 in zip(first, second)
        ]

        corners = [
            apply_function_triple(f, *ops)
            for ops in ((A1, B1, C1), (A2, B1, C1), (A2, B2, C1), (A2, B2, C2))
        ]

        steps_ok = all(
            schatten_norm(corners[i] - corners[i + 1], p) <= scale * d_norms[i] + slack
            for i in range(3)
        )
        lhs = schatten_norm(corners[0] - corners[3], p)
        bound = scale * sum(d_norms)
        rows.append(
            LipschitzTrial(
                trial=t,
                lhs=lhs,
                bound=bound,
                steps_ok=steps_ok,
                total_ok=lhs <= bound + slack,
            )
        )
    return LipschitzCheckReport(N=N, p=p, trials=tuple(rows))
