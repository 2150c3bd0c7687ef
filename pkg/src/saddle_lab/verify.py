"""Empirical verification: rate fits, outcome classification, bound envelopes,
and reconciliation of every closed form against the brute-force eigensolver."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import games as games_mod
from . import linalg, predict, spectral
from .dynamics import (Algo, DogdaState, IterateState, StopReason, Trajectory,
                       companion_matrix, dogda_step, ogda_step, run)
from .games import BilinearGame, payoffs
from .predict import DistanceD, LimitPrediction
from .spectral import Regime, SpectralReport

FLOOR = 1e-13
TRANSIENT_FRACTION = 0.2   # early eigen-mixture pollutes the slope
COOP_CAP = 1e6
COOP_TREND_POINTS = 50


class InsufficientDataError(ValueError):
    pass


class NotConvergedError(ValueError):
    pass


def _log_linear_fit(times: np.ndarray, values: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit of log(values) ~ slope * t + intercept; returns
    (slope, intercept, r_squared)."""
    t = np.asarray(times, dtype=float)
    logs = np.log(np.asarray(values, dtype=float))
    t_mean, l_mean = t.mean(), logs.mean()
    var = float(np.sum((t - t_mean) ** 2))
    if var == 0.0:
        raise InsufficientDataError("degenerate fit window")
    slope = float(np.sum((t - t_mean) * (logs - l_mean)) / var)
    intercept = float(l_mean - slope * t_mean)
    ss_res = float(np.sum((logs - slope * t - intercept) ** 2))
    ss_tot = float(np.sum((logs - l_mean) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def _distances(traj: Trajectory, x_inf: np.ndarray, y_inf: np.ndarray) -> np.ndarray:
    return np.array([
        math.hypot(*(np.concatenate([s.x - x_inf, s.y - y_inf])))
        for s in traj.states])


@dataclass
class RateFit:
    fitted_ratio: float
    window: tuple[int, int]
    r_squared: float
    floor_hit: bool


def estimate_rate(traj: Trajectory, limit: LimitPrediction,
                  floor: float = FLOOR) -> RateFit:
    """Geometric ratio from the log-distance slope over the clean window
    (past the transient, above the double-precision floor)."""
    if traj.stop_reason is StopReason.DIVERGED:
        raise NotConvergedError("trajectory diverged; no rate to fit")
    x_inf, y_inf = limit.pair()
    dists = _distances(traj, x_inf, y_inf)
    times = np.asarray(traj.times)
    start = int(math.ceil(TRANSIENT_FRACTION * len(dists)))
    floor_hits = np.nonzero(dists <= floor)[0]
    end = int(floor_hits[0]) if floor_hits.size else len(dists)
    keep = slice(start, end)
    t_win, d_win = times[keep], dists[keep]
    mask = d_win > floor
    t_win, d_win = t_win[mask], d_win[mask]
    if t_win.size < 10:
        raise InsufficientDataError(
            f"only {t_win.size} usable points between transient and floor")
    slope, _, r2 = _log_linear_fit(t_win, d_win)
    return RateFit(fitted_ratio=math.exp(slope),
                   window=(int(t_win[0]), int(t_win[-1])),
                   r_squared=r2, floor_hit=bool(floor_hits.size))


class OutcomeKind(str, enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    COOPERATING = "Cooperating"


@dataclass
class OutcomeClass:
    kind: OutcomeKind
    limit: tuple[np.ndarray, np.ndarray] | None = None
    growth_ratio: float | None = None
    evidence: dict = field(default_factory=dict)


def _expected_payoff_growth(game: BilinearGame, eta: float) -> float | None:
    """Square of the dominant expanding root: the asymptotic per-step payoff
    growth when a positive coupling eigenvalue drives the blow-up."""
    try:
        spec = spectral.coupling_spectrum(game)
    except linalg.DimensionTooLargeError:
        return None
    reals = [mu.real for mu in spec.values
             if abs(mu.imag) <= 1e-8 * (1.0 + abs(mu)) and mu.real > 1e-12]
    if not reals:
        return None
    nu = math.sqrt(max(reals))
    top_root = 0.5 * (1.0 + 2.0 * eta * nu + math.sqrt(1.0 + 4.0 * eta * eta * nu * nu))
    return top_root ** 2


def classify(traj: Trajectory, game: BilinearGame,
             coop_cap: float = COOP_CAP) -> OutcomeClass:
    """Converged / Cooperating (both payoffs blowing up together) / Diverged.

    Cooperation needs both final payoffs above coop_cap and a fitted per-step
    payoff growth ratio above 1 over the trailing window, which separates
    joint payoff explosion from a one-sided norm blow-up.
    """
    if traj.stop_reason is StopReason.CONVERGED:
        s = traj.final
        return OutcomeClass(OutcomeKind.CONVERGED, limit=(s.x.copy(), s.y.copy()),
                            evidence={"final_norm": max(s.block_norms())})
    pay = np.array([payoffs(game, s.x, s.y) for s in traj.states])
    times = np.asarray(traj.times)
    tail = slice(max(0, len(times) - COOP_TREND_POINTS), len(times))
    g1_tail, g2_tail = pay[tail, 0], pay[tail, 1]
    evidence = {"final_g1": float(pay[-1, 0]), "final_g2": float(pay[-1, 1]),
                "final_norm": max(traj.final.block_norms())}
    expected = _expected_payoff_growth(game, traj.eta)
    if expected is not None:
        evidence["expected_growth_ratio"] = expected
    if (pay[-1] > coop_cap).all() and (g1_tail > 0).all() and (g2_tail > 0).all():
        s1, _, _ = _log_linear_fit(times[tail], g1_tail)
        s2, _, _ = _log_linear_fit(times[tail], g2_tail)
        growth = math.exp(min(s1, s2))
        evidence.update({"growth_g1": math.exp(s1), "growth_g2": math.exp(s2)})
        if growth > 1.0:
            return OutcomeClass(OutcomeKind.COOPERATING, growth_ratio=growth,
                                evidence=evidence)
    return OutcomeClass(OutcomeKind.DIVERGED, evidence=evidence)


@dataclass
class BoundCheck:
    ok: bool
    worst_ratio: float
    max_violation: float
    lambda_used: float
    constant_used: float
    fitted_constant: bool


def check_bound(traj: Trajectory, report: SpectralReport, D: DistanceD,
                limit: LimitPrediction, slack: float = 1e-9,
                floor: float = FLOOR) -> BoundCheck:
    """Check the exponential envelope on every recorded distance above the floor.

    With a closed-form constant (zero-sum Part2/Part3a) the envelope is
    C * D * lambda_max^t. Without one (Part3b, general-sum) the constant is
    fitted on the first half of the run and checked on the second half, using
    lambda_max + 0.01 in the defective Part3b regime.
    """
    x_inf, y_inf = limit.pair()
    dists = _distances(traj, x_inf, y_inf)
    times = np.asarray(traj.times, dtype=float)
    mask = dists > floor
    t_use, d_use = times[mask], dists[mask]
    if t_use.size == 0:
        return BoundCheck(True, 0.0, 0.0, report.lambda_max, 0.0, False)

    if report.C is not None and report.eta_regime in (Regime.PART2, Regime.PART3A):
        lam = report.lambda_max
        env = report.C * D.value * np.power(lam, t_use)
        ratios = d_use / np.maximum(env, 1e-300)
        violations = d_use - env
        ok = bool(np.all(violations <= slack))
        return BoundCheck(ok, float(ratios.max()), float(violations.max()),
                          lam, report.C, False)

    lam = report.lambda_max + (0.01 if report.eta_regime is Regime.PART3B else 0.0)
    half = max(1, t_use.size // 2)
    scaled = d_use / np.power(lam, t_use)
    c_fit = float(scaled[:half].max())
    env = c_fit * 1.05 * np.power(lam, t_use[half:])
    violations = d_use[half:] - env - slack
    ok = bool(np.all(violations <= 0.0)) if env.size else True
    worst = float((d_use[half:] / np.maximum(env, 1e-300)).max()) if env.size else 0.0
    return BoundCheck(ok, worst, float(violations.max(initial=0.0)), lam, c_fit, True)


@dataclass
class OracleReport:
    max_distance: float
    predicted_count: int
    observed_count: int

    @property
    def counts_match(self) -> bool:
        return self.predicted_count == self.observed_count


def _greedy_match_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max pairwise distance under greedy nearest-neighbor matching of two
    equally sized multisets (adequate when spectra are well separated)."""
    remaining = list(b)
    worst = 0.0
    for z in a:
        gaps = [abs(z - w) for w in remaining]
        k = int(np.argmin(gaps))
        worst = max(worst, gaps[k])
        remaining.pop(k)
    return worst


def oracle_reconcile(game: BilinearGame, eta: float) -> OracleReport:
    """Compare the closed-form spectrum against the brute-force eigensolver."""
    pred = spectral.lambda_spectrum(game, eta).as_multiset()
    obs = linalg.eig_complex(companion_matrix(game, eta)).as_multiset()
    if len(pred) != len(obs):
        return OracleReport(float("inf"), len(pred), len(obs))
    return OracleReport(_greedy_match_distance(pred, obs), len(pred), len(obs))


# ----------------------------------------------------------------------------
# Named property suites (the `verify` subcommand runs all of them)
# ----------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "measured": float(self.measured),
                "tolerance": float(self.tolerance), "detail": self.detail}


def random_matrix(rng: np.random.Generator, n: int, p: int,
                  rank: int | None = None,
                  sigma_range: tuple[float, float] = (0.5, 2.0)) -> np.ndarray:
    """Random matrix with controlled singular values (well-conditioned on its
    row/column space, optional exact rank deficiency)."""
    k = min(n, p)
    rank = k if rank is None else rank
    u, _ = np.linalg.qr(rng.normal(size=(n, n)))
    v, _ = np.linalg.qr(rng.normal(size=(p, p)))
    sig = np.zeros((n, p))
    vals = rng.uniform(*sigma_range, size=k)
    vals[rank:] = 0.0
    np.fill_diagonal(sig, vals)
    return u @ sig @ v.T


def random_zero_sum_game(rng: np.random.Generator, n: int | None = None,
                         p: int | None = None, affine: bool = True) -> BilinearGame:
    n = int(rng.integers(1, 5)) if n is None else n
    p = int(rng.integers(1, 5)) if p is None else p
    rank = None
    if min(n, p) > 1 and rng.uniform() < 0.4:
        rank = int(rng.integers(1, min(n, p) + 1))
    a = random_matrix(rng, n, p, rank)
    if not affine:
        return BilinearGame.zero_sum_game(a)
    x_star = rng.normal(size=n)
    y_star = rng.normal(size=p)
    return BilinearGame.zero_sum_game(a, b=-a @ y_star, c=-a.T @ x_star)


def random_negative_spectrum_game(rng: np.random.Generator) -> BilinearGame:
    """General-sum games whose coupling spectrum is real non-positive."""
    n = int(rng.integers(1, 5))
    p = int(rng.integers(1, 5))
    kind = rng.integers(0, 3)
    if kind == 0:
        return games_mod.scale_opponent(
            random_zero_sum_game(rng, n, p), float(rng.uniform(0.5, 2.0)))
    if kind == 1:
        return games_mod.accelerate(random_zero_sum_game(rng, n, p))
    a = random_matrix(rng, n, p)
    q, _ = np.linalg.qr(rng.normal(size=(p, p)))
    spd = q @ np.diag(rng.uniform(0.7, 1.5, size=p)) @ q.T
    return BilinearGame.from_matrices(a, -a @ spd)


def _safe_eta(game: BilinearGame, rng: np.random.Generator,
              lo: float = 0.5, hi: float = 0.9) -> float:
    mu_max = max(float(np.linalg.norm(game.A, 2)) ** 2,
                 float(np.linalg.norm(game.B, 2)) ** 2, 1e-12)
    return float(rng.uniform(lo, hi)) * 0.5 / math.sqrt(mu_max)


def _random_iterate(rng: np.random.Generator, n: int, p: int) -> IterateState:
    return IterateState(rng.uniform(-1, 1, n), rng.uniform(-1, 1, p),
                        rng.uniform(-1, 1, n), rng.uniform(-1, 1, p))


def suite_penrose(rng: np.random.Generator, trials: int = 100) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        shape = tuple(rng.integers(1, 7, size=2))
        a = rng.normal(size=shape)
        if rng.uniform() < 0.2:  # exercise rank deficiency
            a[:, rng.integers(0, shape[1])] = 0.0
        ap = linalg.pinv(a)
        scale = max(1.0, float(np.linalg.norm(a)))
        worst = max(
            worst,
            np.linalg.norm(a @ ap @ a - a) / scale,
            np.linalg.norm(ap @ a @ ap - ap) / max(1.0, np.linalg.norm(ap)),
            np.linalg.norm((a @ ap).T - a @ ap),
            np.linalg.norm((ap @ a).T - ap @ a),
        )
    return CheckResult("linalg.penrose_conditions", worst < 1e-10, worst, 1e-10)


def suite_pinv_kernel(rng: np.random.Generator, trials: int = 40) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        n, p = (int(v) for v in rng.integers(1, 6, size=2))
        rank = int(rng.integers(1, min(n, p) + 1))
        a = random_matrix(rng, n, p, rank)
        ker_pinv = linalg.kernel_basis(linalg.pinv(a))
        ker_at = linalg.kernel_basis(a.T)
        if ker_pinv.dim != ker_at.dim:
            return CheckResult("linalg.pinv_kernel_identity", False, float("inf"), 1e-8,
                               "kernel dimensions differ")
        ang = linalg.principal_angles(ker_pinv, ker_at)
        worst = max(worst, float(ang.max(initial=0.0)))
    return CheckResult("linalg.pinv_kernel_identity", worst < 1e-8, worst, 1e-8)


def suite_projection_idempotent(rng: np.random.Generator, trials: int = 60) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(2, 7))
        k = int(rng.integers(1, dim))
        # complementary pair carved out of one well-conditioned invertible matrix
        m = random_matrix(rng, dim, dim)
        onto = linalg.span(m[:, :k].T)
        along = linalg.span(m[:, k:].T)
        v = rng.normal(size=dim)
        p1 = linalg.project(v, onto)
        worst = max(worst, float(np.linalg.norm(linalg.project(p1, onto) - p1)))
        q1 = linalg.project(v, onto, along=along)
        q2 = linalg.project(q1, onto, along=along)
        worst = max(worst, float(np.linalg.norm(q2 - q1)))
    return CheckResult("linalg.projection_idempotent", worst < 1e-12, worst, 1e-12)


def suite_eig_determinant(rng: np.random.Generator, trials: int = 40) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(1, 7))
        m = rng.normal(size=(dim, dim))
        s = linalg.eig_complex(m)
        det_spec = complex(np.prod(np.repeat(s.values, s.multiplicities)))
        det = np.linalg.det(m)
        rel = abs(det_spec - det) / max(1.0, abs(det))
        conj_gap = _greedy_match_distance(s.as_multiset(),
                                          np.conj(s.as_multiset()))
        worst = max(worst, rel, conj_gap)
    return CheckResult("linalg.eig_det_and_conjugacy", worst < 1e-8, worst, 1e-8)


def suite_sym_eig_reconstruction(rng: np.random.Generator, trials: int = 40) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        dim = int(rng.integers(1, 8))
        m = rng.normal(size=(dim, dim))
        m = m + m.T
        w, v = linalg.sym_eig(m)
        rel = np.linalg.norm(v @ np.diag(w) @ v.T - m) / max(1.0, np.linalg.norm(m))
        worst = max(worst, float(rel))
    return CheckResult("linalg.sym_eig_reconstruction", worst < 1e-10, worst, 1e-10)


def suite_nash_scale_invariance(rng: np.random.Generator, trials: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng)
        scaled = games_mod.scale_opponent(game, float(rng.uniform(0.2, 3.0)))
        ns0, ns1 = games_mod.nash_set(game), games_mod.nash_set(scaled)
        if ns0.nonempty != ns1.nonempty:
            return CheckResult("games.nash_scale_invariance", False, float("inf"), 1e-8)
        ang_x = linalg.principal_angles(ns0.x_part.directions, ns1.x_part.directions)
        ang_y = linalg.principal_angles(ns0.y_part.directions, ns1.y_part.directions)
        worst = max(worst, float(ang_x.max(initial=0.0)), float(ang_y.max(initial=0.0)),
                    *ns1.residuals(game))
    return CheckResult("games.nash_scale_invariance", worst < 1e-8, worst, 1e-8)


def suite_accelerate_spectrum(rng: np.random.Generator, trials: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = games_mod.accelerate(random_zero_sum_game(rng))
        spec = linalg.eig_complex(game.A @ game.B.T)
        for mu in spec.values:
            worst = max(worst, min(abs(mu), abs(mu + 1.0)))
    return CheckResult("games.accelerate_spectrum_in_0_minus1", worst < 1e-8, worst, 1e-8)


def suite_fixed_points(rng: np.random.Generator, trials: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng)
        eta = _safe_eta(game, rng)
        ns = games_mod.nash_set(game)
        s = IterateState.at(ns.x_star, ns.y_star)
        stepped = ogda_step(game, eta, s)
        worst = max(worst, float(np.linalg.norm(stepped.stacked() - s.stacked())))
        off = _random_iterate(rng, game.n, game.p)
        moved = np.linalg.norm(ogda_step(game, eta, off).stacked() - off.stacked())
        grad = np.linalg.norm(np.concatenate([game.A @ off.y + game.b,
                                              game.B.T @ off.x + game.f]))
        if grad > 1e-6 and moved < 1e-12:
            return CheckResult("dynamics.fixed_points_are_nash", False,
                               float(moved), 1e-10, "non-Nash point did not move")
    return CheckResult("dynamics.fixed_points_are_nash", worst < 1e-10, worst, 1e-10)


def suite_linear_system_equivalence(rng: np.random.Generator,
                                    trials: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng, affine=False)
        eta = _safe_eta(game, rng)
        lam = companion_matrix(game, eta)
        s = _random_iterate(rng, game.n, game.p)
        z = s.stacked()
        for _ in range(50):
            s = ogda_step(game, eta, s)
            z = lam @ z
            denom = max(1.0, float(np.linalg.norm(z)))
            worst = max(worst, float(np.linalg.norm(s.stacked() - z)) / denom)
    return CheckResult("dynamics.linear_system_equivalence", worst < 1e-12, worst, 1e-12)


def suite_affine_shift_equivalence(rng: np.random.Generator,
                                   trials: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng, affine=True)
        homog = BilinearGame.zero_sum_game(game.A)
        ns = games_mod.nash_set(game)
        eta = _safe_eta(game, rng)
        s_aff = _random_iterate(rng, game.n, game.p)
        s_hom = IterateState(s_aff.x - ns.x_star, s_aff.y - ns.y_star,
                             s_aff.x_prev - ns.x_star, s_aff.y_prev - ns.y_star)
        for _ in range(40):
            s_aff = ogda_step(game, eta, s_aff)
            s_hom = ogda_step(homog, eta, s_hom)
            shifted = s_hom.stacked() + np.concatenate(
                [ns.x_star, ns.y_star, ns.x_star, ns.y_star])
            worst = max(worst, float(np.linalg.norm(s_aff.stacked() - shifted))
                        / max(1.0, float(np.linalg.norm(shifted))))
    return CheckResult("dynamics.affine_shift_equivalence", worst < 1e-12, worst, 1e-12)


def suite_dogda_decoupling(rng: np.random.Generator, trials: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        n, p = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        game = BilinearGame.from_matrices(rng.normal(size=(n, p)),
                                          rng.normal(size=(n, p)))
        eta = _safe_eta(game, rng)
        d = DogdaState.from_iterate(_random_iterate(rng, n, p))
        block1 = BilinearGame.zero_sum_game(-game.B)  # (x, y_aux) half
        block2 = BilinearGame.zero_sum_game(game.A)   # (x_aux, y) half
        s1 = IterateState(d.x, d.y_aux, d.x_prev, d.y_aux_prev)
        s2 = IterateState(d.x_aux, d.y, d.x_aux_prev, d.y_prev)
        for _ in range(40):
            d = dogda_step(game, eta, d)
            s1 = ogda_step(block1, eta, s1)
            s2 = ogda_step(block2, eta, s2)
            gap1 = np.linalg.norm(np.concatenate([d.x - s1.x, d.y_aux - s1.y]))
            gap2 = np.linalg.norm(np.concatenate([d.x_aux - s2.x, d.y - s2.y]))
            scale = max(1.0, float(np.linalg.norm(d.stacked())))
            worst = max(worst, float(gap1) / scale, float(gap2) / scale)
    return CheckResult("dynamics.dogda_decoupling", worst < 1e-12, worst, 1e-12)


def _spectrum_oracle_cases(rng: np.random.Generator, games_count: int = 25,
                           etas_per_game: int = 5):
    for i in range(games_count):
        game = (random_zero_sum_game(rng) if i % 2 == 0
                else random_negative_spectrum_game(rng))
        for _ in range(etas_per_game):
            yield game, _safe_eta(game, rng, lo=0.2, hi=0.95)


def suite_spectrum_oracle(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for game, eta in _spectrum_oracle_cases(rng):
        rep = oracle_reconcile(game, eta)
        if not rep.counts_match:
            return CheckResult("spectral.spectrum_oracle", False, float("inf"), 1e-7,
                               "multiset sizes differ")
        worst = max(worst, rep.max_distance)
    return CheckResult("spectral.spectrum_oracle", worst < 1e-7, worst, 1e-7)


def suite_root_residuals(rng: np.random.Generator, trials: int = 200) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        mu = float(rng.uniform(-30.0, 30.0))
        eta = float(rng.uniform(0.01, 0.6))
        rs = spectral.s_star_roots(mu, eta)
        tol = 1e-12 * (1.0 + abs(mu) * eta * eta)
        worst = max(worst, float(rs.residuals().max()) / tol * 1e-12)
    return CheckResult("spectral.root_residuals", worst < 1e-12, worst, 1e-12)


def suite_rate_realized_by_spectrum(rng: np.random.Generator,
                                    trials: int = 20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng, affine=False)
        mu_max = float(np.linalg.norm(game.A, 2)) ** 2
        eta = float(rng.uniform(0.15, 0.95)) / math.sqrt(3.0 * mu_max)
        report = spectral.rate_report(game, eta)
        if not report.applicable:
            continue
        spec = spectral.lambda_spectrum(game, eta)
        realized = spec.max_modulus(exclude=1.0 + 0.0j, tol=1e-9)
        worst = max(worst, abs(realized - report.lambda_max))
    return CheckResult("spectral.rate_realized_by_spectrum", worst < 1e-10, worst, 1e-10)


def suite_optimal_eta_argmin(rng: np.random.Generator) -> CheckResult:
    """The closed-form (eta*, lambda*) must sit on the rate curve and beat
    every grid point (the curve has a square-root kink at the optimum, so the
    grid can only approach from above)."""
    worst = 0.0
    for alpha in np.arange(0.05, 1.0001, 0.05):
        mu_min, mu_max = float(alpha), 1.0
        eta_star, lam_star = spectral.optimal_eta(mu_min, mu_max)
        game = BilinearGame.zero_sum_game(np.diag([math.sqrt(mu_min), 1.0]))
        lam_at_star = spectral.rate_report(game, eta_star).lambda_max
        worst = max(worst, abs(lam_at_star - lam_star))
        for e in np.linspace(0.02, 1.0 / math.sqrt(3.0) - 1e-6, 400):
            undercut = lam_star - spectral.rate_report(game, float(e)).lambda_max
            worst = max(worst, undercut)
    return CheckResult("spectral.optimal_eta_is_argmin", worst < 1e-9, worst, 1e-9)


def suite_part2_monotonicity(rng: np.random.Generator) -> CheckResult:
    ok = True
    for _ in range(10):
        mu_min = float(rng.uniform(0.1, 2.0))
        mu_max = float(rng.uniform(1.0, 2.0)) * mu_min
        etas = np.linspace(1e-3, 0.5 / math.sqrt(mu_max) * 0.999, 200)
        lams = [spectral.rate_lambda_star(float(e), mu_min) for e in etas]
        ok = ok and all(b < a for a, b in zip(lams, lams[1:]))
    return CheckResult("spectral.part2_rate_monotone_in_eta", ok,
                       0.0 if ok else 1.0, 0.0)


def _applicable_prediction_cases(rng: np.random.Generator, count: int = 25):
    produced = 0
    while produced < count:
        kind = produced % 4
        if kind == 0:
            game, algo = random_zero_sum_game(rng), Algo.OGDA
        elif kind == 1:
            game, algo = random_negative_spectrum_game(rng), Algo.OGDA
        elif kind == 2:
            game, algo = games_mod.accelerate(random_zero_sum_game(rng)), Algo.OGDA
        else:
            n, p = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            game = BilinearGame.from_matrices(rng.normal(size=(n, p)),
                                              rng.normal(size=(n, p)))
            algo = Algo.DOGDA
        eta = _safe_eta(game, rng, lo=0.4, hi=0.8)
        init = _random_iterate(rng, game.n, game.p)
        pred = predict.predict_limit(game, algo, eta, init)
        if not pred.valid:
            continue
        report = spectral.rate_report(game, eta, algo)
        # keep the step budget finite: skip near-unit ratios
        if not report.applicable or report.lambda_max > 0.995:
            continue
        produced += 1
        yield game, algo, eta, init, pred


def suite_limit_predictions(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for game, algo, eta, init, pred in _applicable_prediction_cases(rng):
        traj = run(game, algo, eta, init, max_steps=60000, stop_tol=1e-14)
        if traj.stop_reason is StopReason.DIVERGED:
            return CheckResult("predict.limit_predictions", False, float("inf"), 1e-6,
                               "applicable configuration diverged")
        final = traj.final
        gap = np.linalg.norm(np.concatenate([final.x - pred.x_inf,
                                             final.y - pred.y_inf]))
        allowed = max(1e-8, 1e-6 * float(np.linalg.norm(init.stacked())))
        worst = max(worst, float(gap) / allowed * 1e-6)
    return CheckResult("predict.limit_predictions", worst < 1e-6, worst, 1e-6)


def suite_init_independence(rng: np.random.Generator, trials: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng)
        eta = _safe_eta(game, rng)
        init_a = _random_iterate(rng, game.n, game.p)
        init_b = IterateState(init_a.x, init_a.y, rng.uniform(-1, 1, game.n),
                              rng.uniform(-1, 1, game.p))
        pred_a = predict.predict_limit(game, Algo.OGDA, eta, init_a)
        pred_b = predict.predict_limit(game, Algo.OGDA, eta, init_b)
        gap = np.linalg.norm(np.concatenate([pred_a.x_inf - pred_b.x_inf,
                                             pred_a.y_inf - pred_b.y_inf]))
        ta = run(game, Algo.OGDA, eta, init_a, max_steps=60000, stop_tol=1e-14)
        tb = run(game, Algo.OGDA, eta, init_b, max_steps=60000, stop_tol=1e-14)
        emp = np.linalg.norm(np.concatenate([ta.final.x - tb.final.x,
                                             ta.final.y - tb.final.y]))
        worst = max(worst, float(gap), float(emp))
    return CheckResult("predict.init_independence", worst < 1e-8, worst, 1e-8)


def suite_prediction_is_fixed_point(rng: np.random.Generator,
                                    trials: int = 15) -> CheckResult:
    worst = 0.0
    for game, algo, eta, init, pred in _applicable_prediction_cases(rng, trials):
        if algo is Algo.DOGDA:
            continue
        s = IterateState.at(pred.x_inf, pred.y_inf)
        moved = np.linalg.norm(ogda_step(game, eta, s).stacked() - s.stacked())
        worst = max(worst, float(moved))
    return CheckResult("predict.prediction_is_fixed_point", worst < 1e-10, worst, 1e-10)


def suite_witness_rates(rng: np.random.Generator, trials: int = 8) -> CheckResult:
    worst_low, worst_high = 0.0, 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng, affine=False)
        mu_max = float(np.linalg.norm(game.A, 2)) ** 2
        eta = float(rng.uniform(0.3, 0.9)) / math.sqrt(3.0 * mu_max)
        report = spectral.rate_report(game, eta)
        if not report.applicable or report.eta_regime is Regime.PART3B:
            continue
        witness = predict.tight_witness(game, eta)
        traj = run(game, Algo.OGDA, eta, witness, max_steps=2500)
        pred = predict.predict_limit(game, Algo.OGDA, eta, witness)
        fit = estimate_rate(traj, pred)
        worst_low = max(worst_low, report.lambda_max - fit.fitted_ratio)
        worst_high = max(worst_high, fit.fitted_ratio - report.lambda_max)
    worst = max(worst_low - 0.005, worst_high - 0.02, 0.0)
    return CheckResult("predict.witness_rate_tightness", worst == 0.0,
                       max(worst_low, worst_high), 0.02,
                       f"below={worst_low:.2e} above={worst_high:.2e}")


def suite_cooperation_never_diverges(rng: np.random.Generator,
                                     trials: int = 20) -> CheckResult:
    for _ in range(trials):
        n, p = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        a = rng.normal(size=(n, p))
        if np.linalg.norm(a) < 1e-9:
            continue
        alpha = float(rng.uniform(0.2, 2.0))
        game = BilinearGame.from_matrices(a, alpha * a)
        mu_max = float(np.linalg.norm(game.B.T @ game.A, 2))
        eta = float(rng.uniform(0.4, 0.9)) * 0.5 / math.sqrt(mu_max)
        traj = run(game, Algo.OGDA, eta, _random_iterate(rng, n, p),
                   max_steps=40000)
        outcome = classify(traj, game)
        if outcome.kind is OutcomeKind.DIVERGED:
            return CheckResult("verify.cooperation_never_diverges", False, 1.0, 0.0,
                               f"diverged with alpha={alpha}")
    return CheckResult("verify.cooperation_never_diverges", True, 0.0, 0.0)


def suite_part2_bounds(rng: np.random.Generator, trials: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        game = random_zero_sum_game(rng)
        mu_max = float(np.linalg.norm(game.A, 2)) ** 2
        eta = float(rng.uniform(0.3, 0.9)) * 0.5 / math.sqrt(mu_max)
        report = spectral.rate_report(game, eta)
        if report.eta_regime is not Regime.PART2:
            continue
        init = _random_iterate(rng, game.n, game.p)
        pred = predict.predict_limit(game, Algo.OGDA, eta, init)
        traj = run(game, Algo.OGDA, eta, init, max_steps=30000)
        check = check_bound(traj, report, predict.distance_to_nash(game, init), pred)
        if not check.ok:
            return CheckResult("verify.part2_bound_envelope", False,
                               check.max_violation, 1e-9, "envelope violated")
        fit = estimate_rate(traj, pred)
        worst = max(worst, fit.fitted_ratio - report.lambda_max)
    return CheckResult("verify.part2_bound_envelope", worst <= 0.02, worst, 0.02)


def suite_part3a_bounds(rng: np.random.Generator, trials: int = 8) -> CheckResult:
    """The envelope also holds with the large-step constant (steps between
    1/(2 sqrt(mu_max)) and the divergence threshold)."""
    count, worst = 0, 0.0
    while count < trials:
        game = random_zero_sum_game(rng)
        mu_max = float(np.linalg.norm(game.A, 2)) ** 2
        eta = float(rng.uniform(0.51, 0.98)) / math.sqrt(3.0 * mu_max)
        report = spectral.rate_report(game, eta)
        if report.eta_regime is not Regime.PART3A or report.lambda_max > 0.995:
            continue
        init = _random_iterate(rng, game.n, game.p)
        traj = run(game, Algo.OGDA, eta, init, max_steps=40000)
        pred = predict.predict_limit(game, Algo.OGDA, eta, init)
        check = check_bound(traj, report, predict.distance_to_nash(game, init), pred)
        if not check.ok:
            return CheckResult("verify.part3a_bound_envelope", False,
                               check.max_violation, 1e-9, "envelope violated")
        worst = max(worst, check.worst_ratio)
        count += 1
    return CheckResult("verify.part3a_bound_envelope", worst <= 1.0, worst, 1.0)


def run_all_suites(seed: int = 20240) -> list[CheckResult]:
    """Every module's invariants, as named pass/fail checks (deterministic)."""
    suites = [
        suite_penrose, suite_pinv_kernel, suite_projection_idempotent,
        suite_eig_determinant, suite_sym_eig_reconstruction,
        suite_nash_scale_invariance, suite_accelerate_spectrum,
        suite_fixed_points, suite_linear_system_equivalence,
        suite_affine_shift_equivalence, suite_dogda_decoupling,
        suite_spectrum_oracle, suite_root_residuals,
        suite_rate_realized_by_spectrum, suite_optimal_eta_argmin,
        suite_part2_monotonicity, suite_limit_predictions,
        suite_init_independence, suite_prediction_is_fixed_point,
        suite_witness_rates, suite_cooperation_never_diverges,
        suite_part2_bounds, suite_part3a_bounds,
    ]
    results = []
    for idx, suite in enumerate(suites):
        results.append(suite(np.random.default_rng(seed + idx)))
    return results
