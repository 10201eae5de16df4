"""Heat semigroup, resolvent, stationary analysis and path sampling.

The finite level-m generator is exact; floating point enters only through
matrix exponentials, eigen-solves and random sampling.  The semigroup is
diagonalised on the analytically known eigenvectors (constants plus
wavelets) first; only the small completeness-gap block goes through a dense
solver.  Paths are simulated by the exact jump-chain construction
(exponential holding times, jump probabilities proportional to the rates),
with one deterministic child stream per path index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .operator import GeneratorMatrix, OperatorConfig
from .padic import Disc, haar_measure
from .wavelets import LevelFunction, Wavelet, admissible_wavelets, wavelet_eval


class NumericalBreakdown(ArithmeticError):
    """Stochasticity of the computed semigroup drifted beyond tolerance."""


class SingularSystem(ArithmeticError):
    """The resolvent system was singular (impossible for eta > 0)."""


class Reducible(ValueError):
    """The jump chain is not irreducible."""


ROW_SUM_TOL = 1e-9
CLAMP_TOL = 1e-12


def omega_masses(cfg: OperatorConfig, states: Sequence[Disc]) -> np.ndarray:
    return np.array([float(cfg.profile.density_at(d.center)
                           * haar_measure(d, cfg.p)) for d in states])


@dataclass(frozen=True)
class SpectralData:
    """Block triangularisation of Q over [constants | wavelets | gap].

    ``known_eigenvalues`` pairs each wavelet column with its exact decay
    rate; the gap block is handled densely and its eigenvalues reported.
    """

    states: tuple[Disc, ...]
    basis: np.ndarray          # columns: 1, wavelet vectors, gap vectors
    triangular: np.ndarray     # basis^-1 Q basis (block upper triangular)
    wavelets: tuple[Wavelet, ...]
    wavelet_rates: tuple[float, ...]
    gap_eigenvalues: tuple[complex, ...]
    coupling_defect: float     # largest lower-left entry (should be ~0)


def spectral_data(cfg: OperatorConfig, gen: GeneratorMatrix) -> SpectralData:
    from .operator import lambda_exact

    q = np.array(gen.as_floats())
    n = gen.size
    states = gen.states
    wavelets = tuple(w for w in admissible_wavelets(cfg.profile, gen.level))
    cols = [np.ones(n, dtype=complex)]
    rates = []
    by_support: dict[Disc, Fraction] = {}
    for w in wavelets:
        vec = np.array([complex(wavelet_eval(w, d.center, cfg.profile, "omega"))
                        for d in states])
        cols.append(vec)
        if w.support not in by_support:
            by_support[w.support] = Fraction(lambda_exact(cfg, w.support,
                                                          gen.cutoff).value)
        rates.append(float(by_support[w.support]))
    known = np.column_stack(cols)
    # complete with the omega-orthogonal complement of the known columns
    weights = omega_masses(cfg, states)
    scaled = known * np.sqrt(weights)[:, None]
    u2, s2, _ = np.linalg.svd(scaled, full_matrices=True)
    rank = int(np.sum(s2 > 1e-10))
    complement = u2[:, rank:]
    gap_cols = complement / np.sqrt(weights)[:, None]
    basis = np.column_stack([known, gap_cols])
    tri = np.linalg.solve(basis, q @ basis)
    k = known.shape[1]
    defect = float(np.max(np.abs(tri[k:, :k]))) if k < n else 0.0
    gap_eigs = tuple(np.linalg.eigvals(tri[k:, k:])) if k < n else ()
    return SpectralData(states, basis, tri, wavelets, tuple(rates),
                        gap_eigs, defect)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic P_t with provenance and the observed row-sum drift."""

    t: float
    matrix: np.ndarray
    provenance: str
    row_sum_error: float
    min_entry: float

    def clamped(self) -> np.ndarray:
        out = np.where(self.matrix < 0, 0.0, self.matrix)
        return out / out.sum(axis=1, keepdims=True)


def transition_matrix(cfg: OperatorConfig, gen: GeneratorMatrix, t: float,
                      data: SpectralData | None = None,
                      method: str = "spectral") -> TransitionMatrix:
    """P_t = exp(tQ), via the known eigenbasis or dense scaling-and-squaring.

    Stochasticity is asserted: rows must sum to 1 within ROW_SUM_TOL and
    entries must not dip below -CLAMP_TOL beyond reporting.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if method == "spectral":
        if data is None:
            data = spectral_data(cfg, gen)
        core = expm(t * data.triangular)
        p = data.basis @ core @ np.linalg.inv(data.basis)
        imag = float(np.max(np.abs(p.imag)))
        if imag > 1e-9:
            raise NumericalBreakdown(f"imaginary leakage {imag}")
        p = p.real
        provenance = "eigendecomposition"
    elif method == "dense":
        p = expm(t * np.array(gen.as_floats()))
        provenance = "scaling-and-squaring"
    else:
        raise ValueError(f"unknown method {method!r}")
    drift = float(np.max(np.abs(p.sum(axis=1) - 1)))
    if drift > ROW_SUM_TOL:
        raise NumericalBreakdown(f"row-sum drift {drift}")
    return TransitionMatrix(float(t), p, provenance, drift,
                            float(p.min()))


@dataclass(frozen=True)
class HeatSolution:
    times: tuple[float, ...]
    states: tuple[Disc, ...]
    values: np.ndarray  # shape (len(times), n)

    def sup_norms(self) -> list[float]:
        return [float(np.max(np.abs(row))) for row in self.values]


def solve_cauchy(cfg: OperatorConfig, gen: GeneratorMatrix,
                 h0: LevelFunction, times: Sequence[float],
                 data: SpectralData | None = None) -> HeatSolution:
    """h(t) = P_t h0 on the time grid; t = 0 reproduces h0 exactly."""
    if data is None:
        data = spectral_data(cfg, gen)
    hd = h0.as_dict()
    try:
        vec = np.array([complex(hd[d]) for d in gen.states])
    except KeyError as exc:
        raise ValueError(f"initial condition misses state {exc}") from exc
    inv = np.linalg.inv(data.basis)
    coeffs = inv @ vec
    rows = []
    for t in times:
        if t == 0:
            rows.append(vec.copy())
            continue
        core = expm(float(t) * data.triangular)
        rows.append(data.basis @ (core @ coeffs))
    values = np.array(rows)
    if np.max(np.abs(values.imag)) < 1e-9:
        values = values.real
    return HeatSolution(tuple(float(t) for t in times), gen.states, values)


def resolvent_solve(gen: GeneratorMatrix, eta, h: LevelFunction) -> LevelFunction:
    """Solve (eta*I - Q) u = h; exact over the rationals whenever h is.

    For eta > 0 the system matrix is strictly diagonally dominant (the
    diagonal is eta plus the total jump rate, off-diagonals are the negated
    nonnegative rates), so it is never singular.
    """
    hd = h.as_dict()
    vals = [hd[d] for d in gen.states]
    exact_q = all(isinstance(v, Fraction) for row in gen.rows for v in row)
    exact_h = all(isinstance(v, (int, Fraction)) for v in vals)
    if exact_q and exact_h and isinstance(eta, (int, Fraction)):
        eta = Fraction(eta)
        n = gen.size
        a = [[(eta if i == k else Fraction(0)) - gen.rows[i][k]
              for k in range(n)] for i in range(n)]
        b = [Fraction(v) for v in vals]
        u = _solve_exact(a, b)
        return LevelFunction.from_mapping(
            h.level, {d: u[i] for i, d in enumerate(gen.states)})
    a = float(eta) * np.eye(gen.size) - np.array(gen.as_floats())
    try:
        u = np.linalg.solve(a, np.array([complex(v) for v in vals]))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    return LevelFunction.from_mapping(
        h.level, {d: u[i] for i, d in enumerate(gen.states)})


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with exact rational pivoting."""
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularSystem(f"zero pivot column {col}")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                factor = m[r][col]
                m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


@dataclass(frozen=True)
class StationaryReport:
    distribution: np.ndarray
    residual: float
    tv_distance_to_mass: float


def stationary_distribution(cfg: OperatorConfig,
                            gen: GeneratorMatrix) -> StationaryReport:
    """The unique probability vector with pi Q = 0.

    Irreducibility is checked on the positive-rate graph.  The report also
    measures (never asserts) the total-variation distance between pi and the
    mass-normalised measure.
    """
    n = gen.size
    q = np.array(gen.as_floats())
    _check_irreducible(gen)
    # pi Q = 0, sum pi = 1: least squares on the stacked system
    a = np.vstack([q.T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    residual = float(np.max(np.abs(pi @ q)))
    if residual > 1e-9 or pi.min() <= 0:
        raise Reducible(f"no positive stationary solution (residual {residual})")
    masses = omega_masses(cfg, gen.states)
    masses = masses / masses.sum()
    tv = 0.5 * float(np.abs(pi - masses).sum())
    return StationaryReport(pi, residual, tv)


def _check_irreducible(gen: GeneratorMatrix) -> None:
    n = gen.size
    rates = np.array(gen.as_floats())
    adj = rates > 0
    np.fill_diagonal(adj, False)
    for start in range(n):
        seen = {start}
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            for nxt in np.nonzero(adj[cur])[0]:
                if nxt not in seen:
                    seen.add(int(nxt))
                    frontier.append(int(nxt))
        if len(seen) != n:
            raise Reducible(f"state {start} does not reach every state")


@dataclass(frozen=True)
class PathSample:
    """One cadlag trajectory: right-continuous step function of state indices."""

    path_index: int
    seed: int
    jump_times: tuple[float, ...]
    states: tuple[int, ...]  # visited states; states[0] at time 0

    def state_at(self, t: float) -> int:
        idx = 0
        for k, jt in enumerate(self.jump_times):
            if jt <= t:
                idx = k + 1
            else:
                break
        return self.states[idx]


def sample_paths(gen: GeneratorMatrix, n_paths: int, t_max: float, seed: int,
                 start_index: int = 0, workers: int = 1) -> list[PathSample]:
    """Exact-jump-chain sampling: exponential holds at rate -Q[s,s], jumps
    with probability proportional to the off-diagonal rates.

    Each path uses the child stream (seed, path_index), so results are
    bit-identical independently of scheduling and of the worker count.
    """
    q = np.array(gen.as_floats())
    n = gen.size
    hold_rates = -np.diag(q)
    if np.any(hold_rates <= 0):
        raise ValueError("absorbing state: zero hold rate")
    jump_probs = []
    for i in range(n):
        row = np.where(np.arange(n) == i, 0.0, q[i])
        jump_probs.append(row / hold_rates[i])

    def one_path(k: int) -> PathSample:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(entropy=seed, spawn_key=(k,))))
        t = 0.0
        state = start_index
        times: list[float] = []
        states = [state]
        while True:
            t += rng.exponential(1.0 / hold_rates[state])
            if t >= t_max:
                break
            state = int(rng.choice(n, p=jump_probs[state]))
            times.append(t)
            states.append(state)
        return PathSample(k, seed, tuple(times), tuple(states))

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one_path, range(n_paths)))
    return [one_path(k) for k in range(n_paths)]


@dataclass(frozen=True)
class CheckpointRow:
    t: float
    max_sigma: float
    worst_state: int
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[CheckpointRow, ...]
    n_paths: int
    threshold: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def empirical_validation(cfg: OperatorConfig, gen: GeneratorMatrix,
                         paths: Sequence[PathSample], checkpoints: Sequence[float],
                         start_index: int = 0, sigmas: float = 4.0,
                         data: SpectralData | None = None) -> ValidationReport:
    """Per-checkpoint comparison of the empirical state distribution with the
    transition row, at a binomial-sigma threshold per state."""
    if data is None:
        data = spectral_data(cfg, gen)
    n = gen.size
    n_paths = len(paths)
    rows = []
    for t in checkpoints:
        analytic = transition_matrix(cfg, gen, float(t), data).clamped()[start_index]
        counts = np.zeros(n)
        for path in paths:
            counts[path.state_at(float(t))] += 1
        emp = counts / n_paths
        sigma = np.sqrt(np.maximum(analytic * (1 - analytic), 1e-300) / n_paths)
        dev = np.abs(emp - analytic) / sigma
        worst = int(np.argmax(dev))
        rows.append(CheckpointRow(float(t), float(dev[worst]), worst,
                                  bool(dev[worst] <= sigmas)))
    return ValidationReport(tuple(rows), n_paths, sigmas)
