"""
Logit quantal response equilibrium on the principal branch
Continuation in the precision from the uniform profile at zero
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import softmax

from game import Game, GameError, StrategyProfile

logger = logging.getLogger("bgt.qre")

RESIDUAL_TOLERANCE = 1e-8
NEWTON_SWITCH = 1e-3
DAMPING = 0.5
INITIAL_STEP = 0.01
MAX_STEP = 1.0
MAX_HALVINGS = 40
MAX_FIXED_POINT_ITERATIONS = 5000
MAX_NEWTON_ITERATIONS = 50


class QreConvergenceError(RuntimeError):
    """Continuation stalled; carries the precision reached and the last residual"""

    def __init__(self, message: str, precision: float, residual: float):
        super().__init__(message)
        self.precision = precision
        self.residual = residual


@dataclass(frozen=True)
class QrePathPoint:
    precision: float
    profile: StrategyProfile
    residual: float


def _responses(game: Game, x: np.ndarray, y: np.ndarray, precision: float) -> Tuple[np.ndarray, np.ndarray]:
    a, b = game.payoffs
    return softmax(precision * (a @ y)), softmax(precision * (b.T @ x))


def qre_residual(game: Game, x: np.ndarray, y: np.ndarray, precision: float) -> float:
    """Sup-norm distance between a profile and its quantal best responses"""
    p, q = _responses(game, x, y, precision)
    return float(max(np.abs(p - x).max(), np.abs(q - y).max()))


def _newton_step(game: Game, x: np.ndarray, y: np.ndarray, precision: float) -> np.ndarray:
    a, b = game.payoffs
    n1, n2 = game.shape
    p, q = _responses(game, x, y, precision)
    jacobian = np.eye(n1 + n2)
    jacobian[:n1, n1:] -= precision * (np.diag(p) - np.outer(p, p)) @ a
    jacobian[n1:, :n1] -= precision * (np.diag(q) - np.outer(q, q)) @ b.T
    value = np.concatenate([x - p, y - q])
    return np.linalg.solve(jacobian, value)


def _correct(game: Game, x: np.ndarray, y: np.ndarray, precision: float) -> Optional[Tuple[np.ndarray, np.ndarray, float]]:
    """Damped fixed-point iteration, then Newton once the residual is small; None on failure"""
    n1 = game.shape[0]
    residual = qre_residual(game, x, y, precision)
    iterations = 0
    while residual >= NEWTON_SWITCH:
        if iterations >= MAX_FIXED_POINT_ITERATIONS:
            return None
        p, q = _responses(game, x, y, precision)
        x = DAMPING * x + (1 - DAMPING) * p
        y = DAMPING * y + (1 - DAMPING) * q
        residual = qre_residual(game, x, y, precision)
        iterations += 1

    for _ in range(MAX_NEWTON_ITERATIONS):
        if residual <= RESIDUAL_TOLERANCE:
            return x, y, residual
        try:
            delta = _newton_step(game, x, y, precision)
        except np.linalg.LinAlgError:
            return None
        scale = 1.0
        for _ in range(30):
            nx = x - scale * delta[:n1]
            ny = y - scale * delta[n1:]
            if np.all(nx >= 0) and np.all(ny >= 0):
                nx, ny = nx / nx.sum(), ny / ny.sum()
                new_residual = qre_residual(game, nx, ny, precision)
                if new_residual < residual:
                    break
            scale *= 0.5
        else:
            return None
        x, y, residual = nx, ny, new_residual
    return (x, y, residual) if residual <= RESIDUAL_TOLERANCE else None


def _continue(game: Game, start: QrePathPoint, target: float) -> QrePathPoint:
    """Follow the branch from `start` up to precision `target`"""
    x, y = np.array(start.profile.row), np.array(start.profile.column)
    current = start.precision
    residual = start.residual
    step = INITIAL_STEP
    halvings = 0
    while current < target:
        trial = min(target, current + step)
        corrected = _correct(game, x, y, trial)
        if corrected is None:
            halvings += 1
            step *= 0.5
            logger.debug(f"Game {game.id}: corrector failed at lambda={trial:.6g}, step halved to {step:.3g}")
            if halvings > MAX_HALVINGS:
                raise QreConvergenceError(
                    f"game {game.id!r}: continuation stalled at lambda={current:.6g} "
                    f"(residual {qre_residual(game, x, y, trial):.3g})",
                    precision=current,
                    residual=qre_residual(game, x, y, trial),
                )
            continue
        x, y, residual = corrected
        current = trial
        halvings = 0
        step = min(step * 2.0, MAX_STEP)
    return QrePathPoint(precision=target, profile=StrategyProfile(x, y), residual=residual)


def _origin(game: Game) -> QrePathPoint:
    return QrePathPoint(precision=0.0, profile=StrategyProfile.uniform(game), residual=0.0)


def _check_precision(precision: float) -> float:
    precision = float(precision)
    if not np.isfinite(precision) or precision < 0:
        raise GameError(f"QRE precision must be a finite non-negative number, got {precision}")
    return precision


@lru_cache(maxsize=8192)
def solve_qre(game: Game, precision: float) -> StrategyProfile:
    """Principal-branch logit QRE of a payoff-normalized game"""
    precision = _check_precision(precision)
    if precision == 0.0:
        return _origin(game).profile
    return _continue(game, _origin(game), precision).profile


def qre_path(game: Game, lambda_max: float, steps: int) -> List[QrePathPoint]:
    """Converged points at evenly spaced precisions from 0 to lambda_max"""
    lambda_max = _check_precision(lambda_max)
    if steps < 1:
        raise GameError(f"steps must be at least 1, got {steps}")
    points = [_origin(game)]
    for target in np.unique(np.linspace(0.0, lambda_max, steps + 1))[1:]:
        points.append(_continue(game, points[-1], float(target)))
    return points
