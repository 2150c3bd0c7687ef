"""Iteration engines for bilinear games and the companion form of the linear system.

Steps are pure: each engine maps a state to the next state. `run` drives an
engine until a step budget, a convergence floor, or a divergence cap is hit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .games import BilinearGame, DimensionMismatchError, payoffs
from .linalg import as_vector


class Algo(str, enum.Enum):
    GDA = "GDA"
    OGDA = "OGDA"
    DOGDA = "DOGDA"


class StopReason(str, enum.Enum):
    MAX_STEPS = "MaxSteps"
    CONVERGED = "Converged"
    DIVERGED = "Diverged"


DEFAULT_STOP_TOL = 1e-13   # just above the double-precision floor of log-distance plots
DEFAULT_BLOW_CAP = 1e12


@dataclass
class IterateState:
    """Current pair (x, y) plus the previous pair the optimistic term needs."""

    x: np.ndarray
    y: np.ndarray
    x_prev: np.ndarray
    y_prev: np.ndarray
    blown_up: bool = False

    def __post_init__(self):
        self.x = as_vector(self.x)
        self.y = as_vector(self.y)
        self.x_prev = as_vector(self.x_prev, self.x.size)
        self.y_prev = as_vector(self.y_prev, self.y.size)

    @classmethod
    def at(cls, x, y, x_prev=None, y_prev=None) -> "IterateState":
        x = as_vector(x)
        y = as_vector(y)
        return cls(x, y, x if x_prev is None else x_prev,
                   y if y_prev is None else y_prev)

    def stacked(self) -> np.ndarray:
        """Column vector (x_t, y_t, x_{t-1}, y_{t-1}) driving the linear form."""
        return np.concatenate([self.x, self.y, self.x_prev, self.y_prev])

    def block_norms(self) -> list[float]:
        return [float(np.linalg.norm(v)) for v in (self.x, self.y, self.x_prev, self.y_prev)]


@dataclass
class DogdaState:
    """Two mirrored optimistic systems: (x, y_aux) and (x_aux, y).

    The pair actually played is (x, y); the aux components are the private
    copies each uncoupled zero-sum system evolves.
    """

    x: np.ndarray
    y_aux: np.ndarray
    x_aux: np.ndarray
    y: np.ndarray
    x_prev: np.ndarray
    y_aux_prev: np.ndarray
    x_aux_prev: np.ndarray
    y_prev: np.ndarray
    blown_up: bool = False

    def __post_init__(self):
        for name in ("x", "y_aux", "x_aux", "y", "x_prev", "y_aux_prev",
                     "x_aux_prev", "y_prev"):
            setattr(self, name, as_vector(getattr(self, name)))

    @classmethod
    def from_iterate(cls, s: IterateState) -> "DogdaState":
        return cls(s.x, s.y, s.x, s.y, s.x_prev, s.y_prev, s.x_prev, s.y_prev)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.y_aux, self.x_aux, self.y,
                               self.x_prev, self.y_aux_prev, self.x_aux_prev, self.y_prev])

    def block_norms(self) -> list[float]:
        return [float(np.linalg.norm(v)) for v in
                (self.x, self.y_aux, self.x_aux, self.y,
                 self.x_prev, self.y_aux_prev, self.x_aux_prev, self.y_prev)]


def _check_dims(game: BilinearGame, x: np.ndarray, y: np.ndarray):
    if x.size != game.n or y.size != game.p:
        raise DimensionMismatchError(
            f"state is ({x.size}, {y.size}), game is ({game.n}, {game.p})")


def ogda_step(game: BilinearGame, eta: float, s: IterateState) -> IterateState:
    """One optimistic ascent step for both players (double current gradient,
    subtract the previous one)."""
    _check_dims(game, s.x, s.y)
    gx_now = game.A @ s.y + game.b
    gx_old = game.A @ s.y_prev + game.b
    gy_now = game.B.T @ s.x + game.f
    gy_old = game.B.T @ s.x_prev + game.f
    return IterateState(s.x + eta * (2.0 * gx_now - gx_old),
                        s.y + eta * (2.0 * gy_now - gy_old), s.x, s.y)


def gda_step(game: BilinearGame, eta: float, s: IterateState) -> IterateState:
    """Plain simultaneous gradient ascent; the previous iterates are ignored."""
    _check_dims(game, s.x, s.y)
    return IterateState(s.x + eta * (game.A @ s.y + game.b),
                        s.y + eta * (game.B.T @ s.x + game.f), s.x, s.y)


def dogda_step(game: BilinearGame, eta: float, s: DogdaState) -> DogdaState:
    """One step of the doubled optimistic scheme.

    (x, y_aux) runs the zero-sum optimistic dynamics for player 2's payoff
    (x descends it, y_aux ascends it); (x_aux, y) runs them for player 1's
    payoff. The played pair (x, y) therefore converges to a Nash equilibrium
    of the original general-sum game whenever both halves converge.
    """
    _check_dims(game, s.x, s.y)
    g2x_now = game.B @ s.y_aux + game.e
    g2x_old = game.B @ s.y_aux_prev + game.e
    g2y_now = game.B.T @ s.x + game.f
    g2y_old = game.B.T @ s.x_prev + game.f
    g1x_now = game.A @ s.y + game.b
    g1x_old = game.A @ s.y_prev + game.b
    g1y_now = game.A.T @ s.x_aux + game.c
    g1y_old = game.A.T @ s.x_aux_prev + game.c
    return DogdaState(
        x=s.x - eta * (2.0 * g2x_now - g2x_old),
        y_aux=s.y_aux + eta * (2.0 * g2y_now - g2y_old),
        x_aux=s.x_aux + eta * (2.0 * g1x_now - g1x_old),
        y=s.y - eta * (2.0 * g1y_now - g1y_old),
        x_prev=s.x, y_aux_prev=s.y_aux, x_aux_prev=s.x_aux, y_prev=s.y)


def companion_matrix(game: BilinearGame, eta: float) -> np.ndarray:
    """The 2(n+p)-square matrix driving Z_{t+1} = M Z_t for the homogeneous
    optimistic dynamics, Z_t = (x_t, y_t, x_{t-1}, y_{t-1})."""
    n, p = game.n, game.p
    i_n, i_p = np.eye(n), np.eye(p)
    z_np, z_pn = np.zeros((n, p)), np.zeros((p, n))
    z_nn, z_pp = np.zeros((n, n)), np.zeros((p, p))
    return np.block([
        [i_n, 2 * eta * game.A, z_nn, -eta * game.A],
        [2 * eta * game.B.T, i_p, -eta * game.B.T, z_pp],
        [i_n, z_np, z_nn, z_np],
        [z_pn, i_p, z_pn, z_pp],
    ])


@dataclass
class Trajectory:
    algorithm: Algo
    eta: float
    states: list = field(default_factory=list)
    times: list[int] = field(default_factory=list)
    record_stride: int = 1
    stop_reason: StopReason = StopReason.MAX_STEPS

    @property
    def final(self):
        return self.states[-1]

    def positions(self) -> np.ndarray:
        """Recorded (x, y) rows, one per recorded state."""
        return np.array([np.concatenate([s.x, s.y]) for s in self.states])


def default_record_stride(n: int, p: int, max_steps: int) -> int:
    if n + p <= 16:
        return 1
    return max(1, math.ceil(max_steps / 4096))


def run(game: BilinearGame, algo: Algo, eta: float, init,
        max_steps: int = 10000, stop_tol: float = DEFAULT_STOP_TOL,
        blow_cap: float = DEFAULT_BLOW_CAP, record_stride: int | None = None) -> Trajectory:
    """Iterate until the step budget, the convergence floor, or the blow-up cap.

    Convergence means the full state moved by less than stop_tol in one step;
    divergence means some block norm crossed blow_cap (a single coordinate
    block is enough, blow-ups live in one eigendirection). Every
    record_stride-th state is kept, plus the final one.
    """
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    algo = Algo(algo)
    if algo is Algo.DOGDA and isinstance(init, IterateState):
        init = DogdaState.from_iterate(init)
    if algo is not Algo.DOGDA and isinstance(init, DogdaState):
        raise ValueError("doubled state passed to a non-doubled algorithm")
    if record_stride is None:
        record_stride = default_record_stride(game.n, game.p, max_steps)

    step = {Algo.GDA: gda_step, Algo.OGDA: ogda_step, Algo.DOGDA: dogda_step}[algo]
    traj = Trajectory(algo, float(eta), [init], [0], record_stride)
    state = init
    for t in range(1, max_steps + 1):
        new_state = step(game, eta, state)
        if (max(new_state.block_norms()) > blow_cap
                or not np.all(np.isfinite(new_state.stacked()))):
            new_state.blown_up = True
            traj.states.append(new_state)
            traj.times.append(t)
            traj.stop_reason = StopReason.DIVERGED
            return traj
        moved = float(np.linalg.norm(new_state.stacked() - state.stacked()))
        state = new_state
        if moved < stop_tol:
            traj.states.append(state)
            traj.times.append(t)
            traj.stop_reason = StopReason.CONVERGED
            return traj
        if t % record_stride == 0:
            traj.states.append(state)
            traj.times.append(t)
    if traj.times[-1] != max_steps:
        traj.states.append(state)
        traj.times.append(max_steps)
    traj.stop_reason = StopReason.MAX_STEPS
    return traj


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def trajectory_to_csv(traj: Trajectory, game: BilinearGame,
                      limit: tuple[np.ndarray, np.ndarray] | None = None,
                      comments: tuple[str, ...] = ()) -> str:
    """Render the recorded states as CSV.

    Header: t,x_0..x_{n-1},y_0..y_{p-1},dist_limit,g1,g2. The dist_limit
    column is left empty when no limit prediction is supplied.
    """
    n, p = game.n, game.p
    lines = [f"# {text}" for text in comments]
    cols = (["t"] + [f"x_{i}" for i in range(n)] + [f"y_{j}" for j in range(p)]
            + ["dist_limit", "g1", "g2"])
    lines.append(",".join(cols))
    for t, s in zip(traj.times, traj.states):
        g1, g2 = payoffs(game, s.x, s.y)
        if limit is not None:
            dist = math.hypot(*(np.concatenate([s.x - limit[0], s.y - limit[1]])))
            dist_txt = _fmt(dist)
        else:
            dist_txt = ""
        row = ([str(t)] + [_fmt(v) for v in s.x] + [_fmt(v) for v in s.y]
               + [dist_txt, _fmt(g1), _fmt(g2)])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
