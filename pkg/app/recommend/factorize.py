"""Complete V by non-negative, L2-regularized gradient-descent factorization."""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from app.errors import FactorizationDivergedError, InputError
from app.recommend.scoring import ScoreMatrix

logger = logging.getLogger(__name__)


class FactorizationConfig(BaseModel):
    """Hyperparameters of the gradient-descent matrix completion."""

    latent_dim: int = Field(default=20, gt=0)
    learning_rate: float = Field(default=0.0002, gt=0)  # alpha
    regularization: float = Field(default=0.02, ge=0)  # beta
    convergence_tol: float = Field(default=0.001, gt=0)  # on |delta cost| between epochs
    max_epochs: int = Field(default=5000, gt=0)
    rng_seed: int | None = None
    log_every: int = Field(default=100, gt=0)


class FactorizationSummary(BaseModel):
    """What gets written next to the factors."""

    latent_dim: int
    epochs_run: int
    initial_cost: float
    final_cost: float
    converged: bool


@dataclass(frozen=True)
class FactorizationResult:
    user_factors: np.ndarray  # P, users x latent_dim, >= 0
    item_factors: np.ndarray  # Q, articles x latent_dim, >= 0
    epochs_run: int
    initial_cost: float
    final_cost: float
    converged: bool

    def predicted(self) -> np.ndarray:
        """V-hat = P Q^T."""
        return self.user_factors @ self.item_factors.T

    def summary(self) -> FactorizationSummary:
        return FactorizationSummary(
            latent_dim=self.user_factors.shape[1],
            epochs_run=self.epochs_run,
            initial_cost=self.initial_cost,
            final_cost=self.final_cost,
            converged=self.converged,
        )


def _cost(
    P: np.ndarray, Q: np.ndarray, rows: np.ndarray, cols: np.ndarray, values: np.ndarray, beta: float
) -> float:
    errors = values - np.einsum("ij,ij->i", P[rows], Q[cols])
    return float(errors @ errors + beta / 2.0 * (np.sum(P * P) + np.sum(Q * Q)))


def factorize(V: ScoreMatrix, cfg: FactorizationConfig) -> FactorizationResult:
    """
    Fit non-negative factors P, Q to the observed entries of V.

    Minimizes sum over observed (v_ua - p_u . q_a)^2 + beta/2 (|P|^2 + |Q|^2)
    by per-entry gradient steps in fixed user-major order, clamping negative
    factor entries to zero after every step. Stops once the cost changes by
    less than ``convergence_tol`` between epochs, or after ``max_epochs``.
    The change is taken in absolute value, so an epoch that raises the cost
    by more than the tolerance does not stop training; ``converged`` is only
    reported when the final cost is below the initial one.

    Args:
        V: Score matrix with at least one observed entry
        cfg: Factorization hyperparameters (rng_seed drives initialization)

    Returns:
        FactorizationResult with the fitted factors
    """
    n_users, n_articles = V.shape
    if not V.observed:
        raise InputError("cannot factorize a matrix with no observed entries", stage="factorize")
    if cfg.latent_dim > min(n_users, n_articles):
        raise InputError(
            f"latent_dim={cfg.latent_dim} exceeds min(users, articles)={min(n_users, n_articles)}",
            stage="factorize",
        )

    alpha = cfg.learning_rate
    beta = cfg.regularization
    rng = np.random.default_rng(cfg.rng_seed)
    P = rng.random((n_users, cfg.latent_dim))
    Q = rng.random((n_articles, cfg.latent_dim))

    rows, cols, values = V.observed_entries()
    entries = list(zip(rows.tolist(), cols.tolist(), values.tolist()))

    initial_cost = previous = _cost(P, Q, rows, cols, values, beta)
    cost = initial_cost
    converged = False
    epoch = 0

    logger.info(
        "Factorizing %dx%d matrix (%d observed, k=%d, alpha=%g, beta=%g)",
        n_users,
        n_articles,
        len(entries),
        cfg.latent_dim,
        alpha,
        beta,
    )

    for epoch in range(1, cfg.max_epochs + 1):
        for u, a, v in entries:
            p_u = P[u]
            q_a = Q[a]
            err2 = 2.0 * (v - p_u @ q_a)
            new_p = p_u + alpha * (err2 * q_a - beta * p_u)
            q_a += alpha * (err2 * p_u - beta * q_a)
            np.maximum(q_a, 0.0, out=q_a)
            np.maximum(new_p, 0.0, out=p_u)

        cost = _cost(P, Q, rows, cols, values, beta)
        if not math.isfinite(cost):
            raise FactorizationDivergedError(
                f"cost became non-finite at epoch {epoch}; try a smaller learning_rate "
                f"(currently {alpha:g})",
                stage="factorize",
            )
        if epoch % cfg.log_every == 0:
            logger.debug("epoch %d cost %.6f", epoch, cost)

        if abs(previous - cost) < cfg.convergence_tol:
            converged = cost < initial_cost
            break
        previous = cost

    logger.info(
        "Factorization %s after %d epochs: cost %.4f -> %.4f",
        "converged" if converged else "stopped",
        epoch,
        initial_cost,
        cost,
    )
    return FactorizationResult(
        user_factors=P,
        item_factors=Q,
        epochs_run=epoch,
        initial_cost=initial_cost,
        final_cost=cost,
        converged=converged,
    )


def merge(V: ScoreMatrix, result: FactorizationResult) -> ScoreMatrix:
    """
    Build V*: observed scores kept verbatim, predictions everywhere else.

    Args:
        V: Observed score matrix
        result: Factors fitted on V

    Returns:
        Copy of V with ``completed`` populated
    """
    predicted = result.predicted()
    if predicted.shape != V.shape:
        raise InputError(f"factor shapes {predicted.shape} do not match matrix {V.shape}")

    observed = V.dense_observed()
    return V.with_completed(np.where(np.isnan(observed), predicted, observed))


def write_factors(result: FactorizationResult, matrix: ScoreMatrix, directory: str | Path) -> None:
    """Write P and Q as ``row_id,f0..f{k-1}`` CSVs plus a JSON summary."""
    directory = Path(directory)
    k = result.user_factors.shape[1]
    names = [f"f{i}" for i in range(k)]
    for filename, ids, factors in (
        ("user_factors.csv", matrix.users, result.user_factors),
        ("article_factors.csv", matrix.articles, result.item_factors),
    ):
        frame = pd.DataFrame(factors, columns=names)
        frame.insert(0, "row_id", list(ids))
        frame.to_csv(directory / filename, index=False, lineterminator="\n")
    (directory / "factorization.json").write_text(result.summary().model_dump_json(indent=2) + "\n")
