"""Stochastic first-order oracles for the maximum-eigenvalue objective.

Three oracles share the GradSample output type: Gaussian rank-one smoothing,
the matrix-power quadratic-form oracle, and a deterministic exact subgradient
used by tests and reference runs. All stochastic draws come from an explicit
RNG handle so runs are exactly reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import (ConvergenceError, SymMatrix, ensure_rng, leading_eigpair,
                     mat_power_apply, sym_from)


@dataclass(frozen=True)
class SmoothingOracleConfig:
    """Rank-one Gaussian smoothing: max over k draws of lambda_max(X + (eps/d) z z^T).

    eig_tol / eig_max_iter control the inner power iteration (max_iter None
    means the solver default of 50*d). When the top eigenvalues of a draw
    cluster, the iteration stalls at a residual near the cluster width; the
    rank-one perturbation itself only separates eigenvalues at scale epsilon,
    so any vector of such a cluster is a valid subgradient direction at the
    smoothing's own resolution. Stalled iterates with residual <= eig_accept
    * max(1, |lambda|) are therefore accepted (eig_accept None defaults to
    epsilon).
    """

    k: int = 1
    epsilon: float = 1e-2
    eig_tol: float = 1e-8
    eig_max_iter: int | None = None
    eig_accept: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def accept_level(self) -> float:
        return self.epsilon if self.eig_accept is None else self.eig_accept


@dataclass(frozen=True)
class PowerOracleConfig:
    """Matrix-power oracle <X^p u, u>^(1/p) with u uniform on [0,1]^d.

    With square_input the quadratic form is evaluated on X @ X (so the value
    tracks lambda_max(X)^2 and stays well defined off the PSD cone); the
    returned gradient is chain-ruled back to X.
    """

    p: int = 21
    square_input: bool = True

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("power order p must be >= 1")


@dataclass(frozen=True)
class ExactOracleConfig:
    """Deterministic subgradient of lambda_max (testing and reference runs)."""


@dataclass(frozen=True)
class GradSample:
    """One oracle draw: gradient matrix and a scalar objective estimate."""

    grad: SymMatrix
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"oracle value is not finite: {self.value}")


def _leading_or_stalled(m: np.ndarray, cfg: SmoothingOracleConfig, rng):
    try:
        return leading_eigpair(SymMatrix(m), tol=cfg.eig_tol,
                               max_iter=cfg.eig_max_iter, rng=rng,
                               plateau=cfg.accept_level)
    except ConvergenceError as err:
        if err.residual <= cfg.accept_level * max(1.0, abs(err.best_lambda)):
            return err.best_lambda, err.best_vector
        raise


def smoothing_grad(x: SymMatrix, cfg: SmoothingOracleConfig, rng) -> GradSample:
    """One draw of the rank-one smoothing oracle.

    Draws z_1..z_k i.i.d. standard normal, picks the draw maximizing
    lambda_max(X + (eps/d) z z^T), and returns that eigenvalue together with
    v v^T for a unit leading eigenvector v of the winning matrix (a valid
    subgradient direction of the max by Danskin's rule).

    The input is centered by its mean diagonal entry before the eigen-solves;
    this shrinks the dominance shift of the power iteration and makes the
    returned direction equivariant under X -> X + c*I by construction (the
    centered matrices coincide, so identical RNG streams give identical
    gradients).
    """
    gen = ensure_rng(rng)
    d = x.dim
    scale = cfg.epsilon / d
    offset = float(np.mean(np.diag(x.data)))
    base = x.data.copy()
    base[np.diag_indices(d)] -= offset

    best_val = -np.inf
    best_vec = None
    for _ in range(cfg.k):
        z = gen.standard_normal(d)
        lam, vec = _leading_or_stalled(base + scale * np.outer(z, z), cfg, gen)
        if lam > best_val:
            best_val, best_vec = lam, vec
    return GradSample(grad=sym_from(np.outer(best_vec, best_vec)),
                      value=best_val + offset)


def power_value_grad(x: SymMatrix, u: np.ndarray, p: int) -> GradSample:
    """Exact value and gradient of phi_u(X) = <X^p u, u>^(1/p) at a fixed u.

    The gradient is (1/p) s^(1/p - 1) sum_j sym(w_j w_{p-1-j}^T) with
    w_j = X^j u, the true gradient of the per-sample function, hence an
    unbiased draw once u is random.
    """
    w = mat_power_apply(x, p, u)
    s = float(w[p] @ w[0])
    if s <= 0.0:
        raise ValueError(
            f"<X^p u, u> = {s:g} is not positive for the sampled direction")
    value = s ** (1.0 / p)
    coef = value / (p * s)
    acc = np.zeros((x.dim, x.dim))
    for j in range(p):
        acc += np.outer(w[j], w[p - 1 - j])
    return GradSample(grad=sym_from(coef * acc), value=value)


def power_grad(x: SymMatrix, cfg: PowerOracleConfig, rng) -> GradSample:
    """One draw of the matrix-power oracle with u uniform on [0,1]^d."""
    gen = ensure_rng(rng)
    u = gen.random(x.dim)
    if not cfg.square_input:
        return power_value_grad(x, u, cfg.p)
    y = sym_from(x.data @ x.data)
    inner = power_value_grad(y, u, cfg.p)
    chained = x.data @ inner.grad.data + inner.grad.data @ x.data
    return GradSample(grad=sym_from(chained), value=inner.value)


def exact_subgrad(x: SymMatrix) -> GradSample:
    """Deterministic subgradient v v^T at a unit leading eigenvector of X."""
    vals, vecs = np.linalg.eigh(x.data)
    v = vecs[:, -1]
    return GradSample(grad=sym_from(np.outer(v, v)), value=float(vals[-1]))


def resolve_oracle(spec):
    """Turn an oracle config (or any (X, rng) -> GradSample callable) into a callable."""
    if isinstance(spec, SmoothingOracleConfig):
        return lambda x, rng: smoothing_grad(x, spec, rng)
    if isinstance(spec, PowerOracleConfig):
        return lambda x, rng: power_grad(x, spec, rng)
    if isinstance(spec, ExactOracleConfig):
        return lambda x, rng: exact_subgrad(x)
    if callable(spec):
        return spec
    raise TypeError(f"unrecognized oracle spec: {spec!r}")


def oracle_echo(spec) -> dict:
    """JSON-friendly description of an oracle spec for trace headers."""
    if isinstance(spec, SmoothingOracleConfig):
        return {"kind": "smoothing", "k": spec.k, "epsilon": spec.epsilon,
                "eig_tol": spec.eig_tol, "eig_max_iter": spec.eig_max_iter,
                "eig_accept": spec.eig_accept}
    if isinstance(spec, PowerOracleConfig):
        return {"kind": "power", "p": spec.p, "square_input": spec.square_input}
    if isinstance(spec, ExactOracleConfig):
        return {"kind": "exact"}
    return {"kind": "custom", "repr": repr(spec)}
