"""Epsilon-support-vector regression with a Gaussian kernel, trained from scratch.

The dual problem is solved by a sequential-minimal-optimization style pairwise
ascent over the (alpha_i, alpha_i*) variables: at each step the most violating
pair of dual variables is updated in closed form, and the run stops once the
maximal KKT violation drops below a tolerance.  No external QP solver is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAUSSIAN = "gaussian"

# bound-snapping slack, relative to C; keeps dual variables exactly on the box
_SNAP = 1e-12


class SvrConvergenceError(RuntimeError):
    """Training stopped at the epoch limit before reaching the KKT tolerance.

    Carries the partially trained model so the caller can decide whether the
    achieved residual is acceptable.
    """

    def __init__(self, residual: float, tolerance: float, model: "SvrModel"):
        super().__init__(
            f"no convergence: KKT residual {residual:.3e} above tolerance "
            f"{tolerance:.3e} after the epoch limit"
        )
        self.residual = residual
        self.tolerance = tolerance
        self.model = model


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel K(x, y) = exp(-||x - y||^2 / (2 sigma^2))."""

    sigma: float
    kind: str = GAUSSIAN

    def __post_init__(self):
        if self.kind != GAUSSIAN:
            raise ValueError(f"unsupported kernel kind: {self.kind!r}")
        if not self.sigma > 0.0:
            raise ValueError("kernel sigma must be > 0")


@dataclass(frozen=True)
class SvrHyperparams:
    c: float = 100.0
    epsilon: float = 1.0
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec(sigma=0.5))
    kkt_tolerance: float = 1e-3
    max_passes: int = 10_000

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("regularization c must be > 0")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be >= 0")
        if not self.kkt_tolerance > 0.0:
            raise ValueError("kkt_tolerance must be > 0")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


class TrainingSet:
    """Feature matrix plus targets; rows are (feature_vector, target) samples."""

    def __init__(self, features, targets):
        X = np.atleast_2d(np.asarray(features, dtype=float))
        y = np.asarray(targets, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"{X.shape[0]} feature rows but {y.shape[0]} targets"
            )
        self.features = X
        self.targets = y

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n_samples


@dataclass(frozen=True)
class FeatureScaler:
    """Per-dimension affine map onto [0, 1], fitted on a training window.

    A constant dimension (max == min) maps to 0.
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if np.any(self.maxs < self.mins):
            raise ValueError("scaler max must be >= min in every dimension")

    @classmethod
    def identity(cls, dim: int) -> "FeatureScaler":
        return cls(mins=np.zeros(dim), maxs=np.ones(dim))

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.mins.shape[0]:
            raise ValueError(
                f"expected {self.mins.shape[0]} features, got {X.shape[1]}"
            )
        span = self.maxs - self.mins
        safe = np.where(span > 0.0, span, 1.0)
        scaled = (X - self.mins) / safe
        return np.where(span > 0.0, scaled, 0.0)


@dataclass(frozen=True, eq=False)
class SvrModel:
    """Trained regressor f(x) = sum_i beta_i K(sv_i, scale(x)) + bias.

    ``beta`` holds the dual coefficient differences alpha_i - alpha_i*; only
    samples with nonzero beta are kept as support vectors.  Support vectors are
    stored in scaled feature space; ``support_indices`` point back into the
    training set the model was fitted on.
    """

    support_vectors: np.ndarray
    beta: np.ndarray
    bias: float
    kernel: KernelSpec
    feature_scaler: FeatureScaler
    support_indices: np.ndarray

    @property
    def n_support(self) -> int:
        return self.beta.shape[0]


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a pair of raw feature vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    d2 = float(np.sum((x - y) ** 2))
    return float(np.exp(-d2 / (2.0 * spec.sigma**2)))


def kernel_matrix(spec: KernelSpec, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise kernel values between the rows of X and Y (Y defaults to X)."""
    X = np.atleast_2d(X)
    Y = X if Y is None else np.atleast_2d(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError("dimension mismatch between kernel inputs")
    sx = np.sum(X * X, axis=1)
    sy = np.sum(Y * Y, axis=1)
    d2 = sx[:, None] - 2.0 * (X @ Y.T) + sy[None, :]
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * spec.sigma**2))


def fit_scaler(ts: TrainingSet) -> FeatureScaler:
    """Fit the per-dimension [0, 1] scaler on a training set."""
    if ts.n_samples == 0:
        raise ValueError("cannot fit a scaler on an empty training set")
    return FeatureScaler(
        mins=ts.features.min(axis=0), maxs=ts.features.max(axis=0)
    )


def _solve_dual(K: np.ndarray, y: np.ndarray, hp: SvrHyperparams):
    """Pairwise SMO ascent on the epsilon-SVR dual.

    Dual variables are kept as the split pair (alpha, alpha_star).  Each step
    picks the maximal violating pair across the 2n variables and moves it in
    closed form along the equality constraint sum(alpha - alpha_star) = 0.
    Returns (beta, bias, residual, converged).
    """
    n = y.shape[0]
    C, eps = hp.c, hp.epsilon
    snap = _SNAP * max(1.0, C)
    alpha = np.zeros(n)
    alpha_star = np.zeros(n)
    f0 = np.zeros(n)  # sum_j beta_j K_ij, bias excluded
    up = np.empty(2 * n)
    low = np.empty(2 * n)
    converged = False
    gap = np.inf

    for _ in range(hp.max_passes):
        for _ in range(n):
            v_plus = y - f0 - eps
            v_minus = y - f0 + eps
            # b must sit above every entry of `up` and below every entry of `low`
            np.copyto(up[:n], np.where(alpha < C, v_plus, -np.inf))
            np.copyto(up[n:], np.where(alpha_star > 0.0, v_minus, -np.inf))
            np.copyto(low[:n], np.where(alpha > 0.0, v_plus, np.inf))
            np.copyto(low[n:], np.where(alpha_star < C, v_minus, np.inf))
            ku = int(np.argmax(up))
            kl = int(np.argmin(low))
            gap = up[ku] - low[kl]
            if gap <= hp.kkt_tolerance:
                converged = True
                break

            i, i_plus = (ku, True) if ku < n else (ku - n, False)
            j, j_plus = (kl, True) if kl < n else (kl - n, False)
            room_i = (C - alpha[i]) if i_plus else alpha_star[i]
            room_j = alpha[j] if j_plus else (C - alpha_star[j])
            d_max = min(room_i, room_j)
            if d_max <= snap:
                # numerically pinned at the box; snap shut and retry
                if room_i <= snap:
                    if i_plus:
                        alpha[i] = C
                    else:
                        alpha_star[i] = 0.0
                if room_j <= snap:
                    if j_plus:
                        alpha[j] = 0.0
                    else:
                        alpha_star[j] = C
                continue

            eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
            d = d_max if eta <= 1e-15 else min(gap / eta, d_max)
            if i_plus:
                alpha[i] += d
                if C - alpha[i] <= snap:
                    alpha[i] = C
            else:
                alpha_star[i] -= d
                if alpha_star[i] <= snap:
                    alpha_star[i] = 0.0
            if j_plus:
                alpha[j] -= d
                if alpha[j] <= snap:
                    alpha[j] = 0.0
            else:
                alpha_star[j] += d
                if C - alpha_star[j] <= snap:
                    alpha_star[j] = C
            f0 += d * (K[:, i] - K[:, j])
        if converged:
            break
        # refresh the cached prediction to cancel incremental rounding drift
        f0 = K @ (alpha - alpha_star)

    beta = alpha - alpha_star
    v_plus = y - f0 - eps
    v_minus = y - f0 + eps
    np.copyto(up[:n], np.where(alpha < C, v_plus, -np.inf))
    np.copyto(up[n:], np.where(alpha_star > 0.0, v_minus, -np.inf))
    np.copyto(low[:n], np.where(alpha > 0.0, v_plus, np.inf))
    np.copyto(low[n:], np.where(alpha_star < C, v_minus, np.inf))
    lo, hi = float(np.max(up)), float(np.min(low))
    bias = 0.5 * (lo + hi)  # midpoint of the feasible bias interval
    return beta, bias, max(0.0, lo - hi), converged


def train(
    ts: TrainingSet, hp: SvrHyperparams, scaler: FeatureScaler | None = None
) -> SvrModel:
    """Fit an epsilon-SVR model on the training set.

    Features are scaled with ``scaler`` (fitted on ``ts`` when omitted) before
    the dual solve.  Raises :class:`SvrConvergenceError` when the KKT residual
    is still above ``hp.kkt_tolerance`` after ``hp.max_passes`` epochs; the
    exception carries the partial model.
    """
    if ts.n_samples == 0:
        raise ValueError("cannot train on an empty training set")
    if scaler is None:
        scaler = fit_scaler(ts)
    X = scaler.transform(ts.features)
    K = kernel_matrix(hp.kernel, X)
    beta, bias, residual, converged = _solve_dual(K, ts.targets, hp)

    sv_idx = np.flatnonzero(beta != 0.0)
    model = SvrModel(
        support_vectors=X[sv_idx].copy(),
        beta=beta[sv_idx].copy(),
        bias=bias,
        kernel=hp.kernel,
        feature_scaler=scaler,
        support_indices=sv_idx,
    )
    if not converged:
        raise SvrConvergenceError(residual, hp.kkt_tolerance, model)
    return model


def predict(m: SvrModel, x) -> float:
    """Predict the target for one raw feature vector."""
    return float(predict_batch(m, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def predict_batch(m: SvrModel, X) -> np.ndarray:
    """Predict targets for raw feature vectors, one per row of X."""
    Xs = m.feature_scaler.transform(X)
    if m.n_support == 0:
        return np.full(Xs.shape[0], m.bias)
    K = kernel_matrix(m.kernel, Xs, m.support_vectors)
    return K @ m.beta + m.bias


def kkt_residual(m: SvrModel, ts: TrainingSet, hp: SvrHyperparams) -> float:
    """Maximum KKT violation of the model over the training set it was fit on.

    Checks the box constraints, the dual equality constraint, and per-sample
    stationarity/complementary slackness at the stored bias; returns 0 at an
    exact optimum.
    """
    C, eps = hp.c, hp.epsilon
    n = ts.n_samples
    beta = np.zeros(n)
    beta[m.support_indices] = m.beta
    alpha = np.maximum(beta, 0.0)
    alpha_star = np.maximum(-beta, 0.0)
    E = ts.targets - predict_batch(m, ts.features)

    worst = abs(float(np.sum(beta)))  # equality constraint
    worst = max(worst, float(np.max(np.abs(beta) - C, initial=0.0)))  # box

    at_zero = alpha <= 0.0
    at_c = alpha >= C
    free = ~at_zero & ~at_c
    g = E - eps
    worst = max(worst, float(np.max(np.maximum(0.0, g[at_zero]), initial=0.0)))
    worst = max(worst, float(np.max(np.abs(g[free]), initial=0.0)))
    worst = max(worst, float(np.max(np.maximum(0.0, -g[at_c]), initial=0.0)))

    at_zero = alpha_star <= 0.0
    at_c = alpha_star >= C
    free = ~at_zero & ~at_c
    g = E + eps
    worst = max(worst, float(np.max(np.maximum(0.0, -g[at_zero]), initial=0.0)))
    worst = max(worst, float(np.max(np.abs(g[free]), initial=0.0)))
    worst = max(worst, float(np.max(np.maximum(0.0, g[at_c]), initial=0.0)))
    return worst
