"""Affine-bilinear two-player games and the game transformations used for speed-ups.

Player 1 picks x in R^n, player 2 picks y in R^p. Payoffs:

    g1(x, y) = x.A y + b.x + c.y + d      (player 1)
    g2(x, y) = x.B y + e.x + f.y + g      (player 2)

The zero-sum case is B = -A, e = -b, f = -c, g = -d. Nash equilibria are
exactly {(x, y) : B^T x + f = 0, A y + b = 0}; the constants d, g only shift
reported payoffs and never enter the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import SubspaceBasis, as_matrix, as_vector


class DimensionMismatchError(ValueError):
    pass


class NonPositiveScaleError(ValueError):
    pass


@dataclass
class BilinearGame:
    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray
    f: np.ndarray
    d: float = 0.0
    g: float = 0.0

    def __post_init__(self):
        self.A = as_matrix(self.A)
        self.B = as_matrix(self.B)
        if self.A.shape != self.B.shape:
            raise DimensionMismatchError(
                f"A is {self.A.shape}, B is {self.B.shape}; they must match")
        n, p = self.A.shape
        self.b = as_vector(self.b, n)
        self.e = as_vector(self.e, n)
        self.c = as_vector(self.c, p)
        self.f = as_vector(self.f, p)
        self.d = float(self.d)
        self.g = float(self.g)
        for arr in (self.A, self.B, self.b, self.c, self.e, self.f):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.A.shape[1]

    @property
    def zero_sum(self) -> bool:
        return (np.array_equal(self.B, -self.A) and np.array_equal(self.e, -self.b)
                and np.array_equal(self.f, -self.c) and self.g == -self.d)

    @classmethod
    def from_matrices(cls, A, B) -> "BilinearGame":
        A = as_matrix(A)
        n, p = A.shape
        return cls(A, B, np.zeros(n), np.zeros(p), np.zeros(n), np.zeros(p))

    @classmethod
    def zero_sum_game(cls, A, b=None, c=None, d: float = 0.0) -> "BilinearGame":
        A = as_matrix(A)
        n, p = A.shape
        b = np.zeros(n) if b is None else as_vector(b, n)
        c = np.zeros(p) if c is None else as_vector(c, p)
        return cls(A, -A, b, c, -b, -c, d, -d)


def payoffs(game: BilinearGame, x, y) -> tuple[float, float]:
    """Evaluate both payoff forms at (x, y)."""
    try:
        xv = as_vector(x, game.n)
        yv = as_vector(y, game.p)
    except ValueError as exc:
        raise DimensionMismatchError(str(exc)) from exc
    g1 = float(xv @ game.A @ yv + game.b @ xv + game.c @ yv + game.d)
    g2 = float(xv @ game.B @ yv + game.e @ xv + game.f @ yv + game.g)
    return g1, g2


@dataclass
class AffineSet:
    """Solution set {z : M z + r = 0} as particular point + kernel directions."""

    point: np.ndarray
    directions: SubspaceBasis
    feasible: bool
    residual: float

    def contains(self, z, tol: float = 1e-8) -> bool:
        diff = as_vector(z, self.point.size) - self.point
        off = diff - linalg.project(diff, self.directions)
        return self.feasible and float(np.linalg.norm(off)) < tol


def solve_affine(M: np.ndarray, rhs: np.ndarray, rank_tol: float | None = None) -> AffineSet:
    """Least-squares particular solution of M z = -rhs, plus Ker(M)."""
    tol = 1e-10 if rank_tol is None else rank_tol
    point = -linalg.pinv(M) @ rhs
    residual = float(np.linalg.norm(M @ point + rhs))
    feasible = residual <= tol * (1.0 + float(np.linalg.norm(rhs)))
    return AffineSet(point, linalg.kernel_basis(M), feasible, residual)


@dataclass
class NashSet:
    """Nash equilibria {(x, y) : B^T x + f = 0, A y + b = 0}."""

    x_part: AffineSet
    y_part: AffineSet
    nonempty: bool = field(init=False)

    def __post_init__(self):
        self.nonempty = self.x_part.feasible and self.y_part.feasible

    @property
    def x_star(self) -> np.ndarray:
        return self.x_part.point

    @property
    def y_star(self) -> np.ndarray:
        return self.y_part.point

    def residuals(self, game: BilinearGame) -> tuple[float, float]:
        rx = float(np.linalg.norm(game.B.T @ self.x_star + game.f))
        ry = float(np.linalg.norm(game.A @ self.y_star + game.b))
        return rx, ry


def nash_set(game: BilinearGame, rank_tol: float | None = None) -> NashSet:
    """Compute the Nash set; emptiness is reported, never raised."""
    return NashSet(
        x_part=solve_affine(game.B.T, game.f, rank_tol),
        y_part=solve_affine(game.A, game.b, rank_tol),
    )


def accelerate(game: BilinearGame, f_new=None) -> BilinearGame:
    """Replace player 2's coupling with minus the transposed pseudoinverse of A.

    The point of the construction: Sp(A B^T) collapses into {0, -1}, so the
    general-sum dynamics converge at the best possible ratio while keeping
    player 1's payoff (A, b, c) untouched. By default f is chosen as
    pinv(A) @ x* when the zero-sum x-equilibrium x* (A^T x* + c = 0) exists,
    which keeps the x-limit of the original zero-sum game; otherwise f = 0.
    """
    a_pinv = linalg.pinv(game.A)
    if f_new is None:
        x_zs = solve_affine(game.A.T, game.c)
        f_new = a_pinv @ x_zs.point if x_zs.feasible else np.zeros(game.p)
    return BilinearGame(
        A=game.A, B=-a_pinv.T, b=game.b, c=game.c,
        e=np.zeros(game.n), f=as_vector(f_new, game.p), d=game.d, g=0.0)


def scale_opponent(game: BilinearGame, l: float) -> BilinearGame:
    """Turn the zero-sum game g1 into the general-sum pair (g1, -l*g1), l > 0.

    The Nash set is unchanged while the coupling spectrum is scaled by l,
    which trades off against the usable step-size range.
    """
    if l <= 0:
        raise NonPositiveScaleError(f"scale must be positive, got {l}")
    if not game.zero_sum:
        raise ValueError("scale_opponent expects a zero-sum game")
    return BilinearGame(
        A=game.A, B=-l * game.A, b=game.b, c=game.c,
        e=-l * game.b, f=-l * game.c, d=game.d, g=-l * game.d)


def game_to_json(game: BilinearGame) -> dict:
    return {
        "A": linalg.matrix_to_json(game.A),
        "B": None if game.zero_sum else linalg.matrix_to_json(game.B),
        "b": [float(v) for v in game.b],
        "c": [float(v) for v in game.c],
        "e": [float(v) for v in game.e],
        "f": [float(v) for v in game.f],
        "d": game.d,
        "g": game.g,
        "zero_sum": game.zero_sum,
    }


def game_from_json(obj: dict) -> BilinearGame:
    A = linalg.matrix_from_json(obj["A"])
    n, p = A.shape
    zero_sum = bool(obj.get("zero_sum", False))
    b = as_vector(obj.get("b", np.zeros(n)), n)
    c = as_vector(obj.get("c", np.zeros(p)), p)
    d = float(obj.get("d", 0.0))
    if obj.get("B") is None:
        if not zero_sum:
            raise ValueError("B may be omitted only for zero_sum games")
        return BilinearGame.zero_sum_game(A, b, c, d)
    B = linalg.matrix_from_json(obj["B"])
    e = as_vector(obj.get("e", -b if zero_sum else np.zeros(n)), n)
    f = as_vector(obj.get("f", -c if zero_sum else np.zeros(p)), p)
    g = float(obj.get("g", -d if zero_sum else 0.0))
    game = BilinearGame(A, B, b, c, e, f, d, g)
    if zero_sum and not game.zero_sum:
        raise ValueError("zero_sum flag set but (B, e, f, g) do not match")
    return game
