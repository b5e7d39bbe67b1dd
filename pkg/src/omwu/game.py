"""Zero-sum matrix games, simplex vectors, and solution-quality measures.

Convention used everywhere in this package: the row player maximizes
``x^T A y`` and the column player minimizes it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SIMPLEX_SUM_TOL = 1e-12
SUPPORT_TOL = 1e-12


class DimensionMismatchError(ValueError):
    """Strategy vector length does not match the payoff matrix."""


class GameFormatError(ValueError):
    """Malformed game file (non-rectangular rows, non-finite entries, ...)."""


def _as_probs(p) -> np.ndarray:
    """Accept a SimplexPoint or any array-like and return a float vector."""
    if isinstance(p, SimplexPoint):
        return p.probs
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class MatrixGame:
    """Payoff matrix of a two-player zero-sum game.

    ``payoffs`` has one row per max-player strategy and one column per
    min-player strategy; the min player pays ``x^T A y`` to the max player.
    """

    payoffs: np.ndarray

    def __post_init__(self):
        a = np.array(self.payoffs, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise GameFormatError(f"payoff matrix must be 2-d and nonempty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise GameFormatError("payoff matrix contains non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "payoffs", a)

    @property
    def n_rows(self) -> int:
        return self.payoffs.shape[0]

    @property
    def n_cols(self) -> int:
        return self.payoffs.shape[1]

    @property
    def max_abs_payoff(self) -> float:
        return float(np.abs(self.payoffs).max())

    @classmethod
    def from_json(cls, text: str) -> "MatrixGame":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "A" not in obj:
            raise GameFormatError('game file must be a JSON object with key "A"')
        rows = obj["A"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise GameFormatError('"A" must be a nonempty list of rows')
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise GameFormatError('"A" rows have inconsistent lengths')
        return cls(np.array(rows, dtype=float))

    @classmethod
    def load(cls, path) -> "MatrixGame":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_json(self) -> str:
        return json.dumps({"A": self.payoffs.tolist()})

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")


@dataclass(frozen=True)
class SimplexPoint:
    """A probability vector: nonnegative entries summing to one (tol 1e-12)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError(f"probability vector must be 1-d and nonempty, got shape {p.shape}")
        if np.any(p < 0):
            raise ValueError(f"negative probability: min entry {p.min()}")
        if abs(p.sum() - 1.0) > SIMPLEX_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n: int) -> "SimplexPoint":
        return cls(np.full(n, 1.0 / n))

    @property
    def support(self) -> tuple[int, ...]:
        """Indices with mass strictly above the support tolerance."""
        return tuple(int(i) for i in np.flatnonzero(self.probs > SUPPORT_TOL))


@dataclass(frozen=True)
class QualityReport:
    """How far a strategy pair is from solving the game.

    ``epsilon`` is the best unilateral-deviation gain; ``alpha`` is the
    smallest threshold at which every coordinate either carries at most
    ``alpha`` mass or pays within ``alpha`` of the current value.
    """

    alpha: float
    epsilon: float
    value: float


def _check_dims(game: MatrixGame, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != (game.n_rows,):
        raise DimensionMismatchError(f"x has length {x.shape[0] if x.ndim == 1 else x.shape}, expected {game.n_rows}")
    if y.shape != (game.n_cols,):
        raise DimensionMismatchError(f"y has length {y.shape[0] if y.ndim == 1 else y.shape}, expected {game.n_cols}")


def payoff(game: MatrixGame, x, y) -> float:
    """Bilinear value ``x^T A y``."""
    xv, yv = _as_probs(x), _as_probs(y)
    _check_dims(game, xv, yv)
    return float(xv @ game.payoffs @ yv)


def epsilon_gap(game: MatrixGame, x, y) -> float:
    """Smallest eps such that no unilateral deviation gains more than eps.

    Best deviations in a bilinear game are pure, so the gap is computed
    against pure-strategy best responses.
    """
    xv, yv = _as_probs(x), _as_probs(y)
    _check_dims(game, xv, yv)
    ay = game.payoffs @ yv
    atx = game.payoffs.T @ xv
    value = float(xv @ ay)
    return max(float(ay.max()) - value, value - float(atx.min()), 0.0)


def alpha_closeness(game: MatrixGame, x, y) -> float:
    """Smallest alpha making (x, y) alpha-close.

    A pair is alpha-close when every row either has mass <= alpha or pays
    within alpha of the current value, and likewise for columns; the minimal
    such alpha is the max over coordinates of min(mass, payoff deviation).
    """
    xv, yv = _as_probs(x), _as_probs(y)
    _check_dims(game, xv, yv)
    ay = game.payoffs @ yv
    atx = game.payoffs.T @ xv
    value = float(xv @ ay)
    worst_x = float(np.minimum(xv, np.abs(ay - value)).max())
    worst_y = float(np.minimum(yv, np.abs(atx - value)).max())
    return max(worst_x, worst_y)


def quality_report(game: MatrixGame, x, y) -> QualityReport:
    """Bundle alpha-closeness, deviation gap, and current value."""
    return QualityReport(
        alpha=alpha_closeness(game, x, y),
        epsilon=epsilon_gap(game, x, y),
        value=payoff(game, x, y),
    )
