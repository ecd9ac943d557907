"""Analytic machinery behind the coordination guarantees.

Everything here is small dense linear algebra: the disagreement projection
that factors the consensus direction out of the agent states, the reduced
Laplacian it induces, a Lyapunov certificate for that reduced matrix, and the
closed-form constants derived from the certificate (exponential convergence
rate, ISS overshoot gain, a bound on the inter-event error drive, and the
resulting lower bound on the spacing of communication events).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LYAPUNOV_RESIDUAL_TOL = 1e-8
_HURWITZ_TOL = 1e-9


@dataclass(frozen=True)
class GainSet:
    """Coordination control gains.  Field names follow the config schema."""

    a: float      # consensus coupling gain
    b: float      # pace damping gain
    k_pf: float   # path-error feedback gain into the virtual time
    eta: float    # regularizer in the path-error coupling denominator

    def __post_init__(self):
        for name in ("a", "b", "k_pf", "eta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"gain {name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class LyapunovCertificate:
    """Solution pair of the reduced-Laplacian Lyapunov equation.

    ``weight`` is the chosen symmetric positive-definite right-hand side,
    ``solution`` the symmetric positive-definite solution P of
    Lbar^T P + P Lbar = weight, and ``residual_norm`` the Frobenius norm of
    the defect, guaranteed <= LYAPUNOV_RESIDUAL_TOL.
    """

    weight: np.ndarray
    solution: np.ndarray
    residual_norm: float

    @property
    def solution_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.solution)[0])

    @property
    def solution_max_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.solution)[-1])

    @property
    def weight_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.weight)[0])


def disagreement_projection(n: int) -> np.ndarray:
    """(n-1) x n matrix Q with orthonormal rows annihilating the all-ones vector.

    Built by the standard recursion
        Q_k = [[sqrt((k-1)/k), -1/sqrt(k(k-1)) * ones(k-1)^T],
               [0,             Q_{k-1}]],
    starting from Q_2 = [1/sqrt(2), -1/sqrt(2)].  Q maps agent states to
    disagreement coordinates: Q 1 = 0 and Q Q^T = I.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"need an integer n >= 2, got {n!r}")
    q = np.array([[1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)]])
    for k in range(3, n + 1):
        top = np.empty((1, k))
        top[0, 0] = math.sqrt((k - 1.0) / k)
        top[0, 1:] = -1.0 / math.sqrt(k * (k - 1.0))
        below = np.hstack([np.zeros((k - 2, 1)), q])
        q = np.vstack([top, below])
    return q


def reduced_laplacian(lap, q) -> np.ndarray:
    """Project the Laplacian off the consensus direction: Q L Q^T.

    The result's eigenvalue multiset equals that of L with one zero removed,
    so it inherits stability whenever the digraph has a directed spanning tree.
    """
    lap = np.asarray(lap, dtype=float)
    q = np.asarray(q, dtype=float)
    n = lap.shape[0]
    if lap.shape != (n, n) or q.shape != (n - 1, n):
        raise ValueError(f"dimension mismatch: L is {lap.shape}, Q is {q.shape}")
    return q @ lap @ q.T


def lyapunov_certificate(lbar, weight=None) -> LyapunovCertificate:
    """Solve Lbar^T P + P Lbar = weight for symmetric positive-definite P.

    ``weight`` defaults to the identity.  Solved densely through the Kronecker
    form of the (n-1)^2 linear system; fine at the matrix sizes this library
    allows.  Raises ValueError when Lbar has an eigenvalue off the open right
    half plane, which signals a communication graph without a directed
    spanning tree.
    """
    lbar = np.asarray(lbar, dtype=float)
    m = lbar.shape[0]
    if lbar.shape != (m, m):
        raise ValueError(f"expected square matrix, got shape {lbar.shape}")
    if weight is None:
        weight = np.eye(m)
    weight = np.asarray(weight, dtype=float)
    if weight.shape != (m, m):
        raise ValueError("weight dimension mismatch")
    if not np.allclose(weight, weight.T, atol=1e-12):
        raise ValueError("weight must be symmetric")
    if np.linalg.eigvalsh(weight)[0] <= 0:
        raise ValueError("weight must be positive definite")

    eigs = np.linalg.eigvals(lbar)
    if np.min(eigs.real) <= _HURWITZ_TOL:
        raise ValueError(
            "reduced Laplacian is not stabilizing (eigenvalue with real part "
            f"{np.min(eigs.real):.3e}); the communication graph has no directed spanning tree"
        )

    eye = np.eye(m)
    # vec(Lbar^T P) + vec(P Lbar) = (I (x) Lbar^T + Lbar^T (x) I) vec(P),
    # column-major vec convention.
    kron = np.kron(eye, lbar.T) + np.kron(lbar.T, eye)
    sol = np.linalg.solve(kron, weight.flatten(order="F"))
    p = sol.reshape((m, m), order="F")
    p = 0.5 * (p + p.T)

    residual = float(np.linalg.norm(lbar.T @ p + p @ lbar - weight))
    if residual > LYAPUNOV_RESIDUAL_TOL:
        raise ValueError(f"Lyapunov residual {residual:.3e} exceeds {LYAPUNOV_RESIDUAL_TOL:.0e}")
    if np.linalg.eigvalsh(p)[0] <= 0:
        raise ValueError("Lyapunov solution is not positive definite")
    return LyapunovCertificate(weight=weight, solution=p, residual_norm=residual)


def convergence_rate(gains: GainSet, cert: LyapunovCertificate) -> float:
    """Exponential decay rate adopted for the coordination error.

    Equals (a/b) * min_eig(weight) / (3 * max_eig(solution)); scales linearly
    with the gain ratio a/b.
    """
    return (gains.a / gains.b) * cert.weight_min_eig / (3.0 * cert.solution_max_eig)


def state_mixing_matrix(b: float, n: int) -> np.ndarray:
    """The (2n-1)-square change of coordinates between raw and analysis states.

    S = [[b*I_{n-1}, Q], [0, I_n]] with Q the disagreement projection.
    """
    q = disagreement_projection(n)
    s = np.zeros((2 * n - 1, 2 * n - 1))
    s[: n - 1, : n - 1] = b * np.eye(n - 1)
    s[: n - 1, n - 1 :] = q
    s[n - 1 :, n - 1 :] = np.eye(n)
    return s


def overshoot_gain(b: float, beta: float, cert: LyapunovCertificate, n: int) -> float:
    """ISS overshoot factor multiplying the decaying initial-condition term.

    cond(S) * sqrt(max(p_max, beta/2) / min(p_min, beta/2)), where p_min/p_max
    are the extremal eigenvalues of the Lyapunov solution and S is the state
    mixing matrix.  Always >= 1.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    s = state_mixing_matrix(b, n)
    c_hi = max(cert.solution_max_eig, beta / 2.0)
    c_lo = min(cert.solution_min_eig, beta / 2.0)
    return float(
        np.linalg.norm(np.linalg.inv(s), 2) * math.sqrt(c_hi / c_lo) * np.linalg.norm(s, 2)
    )


def input_bound(
    gains: GainSet,
    n: int,
    overshoot: float,
    forcing_gain: float,
    err0_norm: float,
    thr_c1: float,
    thr_c2: float,
    rho: float,
    pace_accel_max: float,
) -> float:
    """Upper bound on the drive of the inter-event estimation-error dynamics.

        a*n*overshoot*err0 + a*n*forcing_gain*(a*n*sqrt(n)*(c1+c2) + k_pf*rho + pace_accel_max)
        + a*n*sqrt(n)*(c1+c2) + k_pf*rho

    ``thr_c1``/``thr_c2`` are the trigger threshold parameters (their sum is
    the threshold ceiling), not Lyapunov eigenvalues.  ``forcing_gain`` is a
    policy input: the ISS forcing gain is not computable from first principles
    here, so 0 yields a lower-envelope estimate.
    """
    for name, v in (
        ("overshoot", overshoot),
        ("forcing_gain", forcing_gain),
        ("err0_norm", err0_norm),
        ("thr_c1", thr_c1),
        ("thr_c2", thr_c2),
        ("rho", rho),
        ("pace_accel_max", pace_accel_max),
    ):
        if v < 0:
            raise ValueError(f"{name} must be nonnegative, got {v}")
    an = gains.a * n
    ceiling_term = an * math.sqrt(n) * (thr_c1 + thr_c2)
    pf_term = gains.k_pf * rho
    return (
        an * overshoot * err0_norm
        + an * forcing_gain * (ceiling_term + pf_term + pace_accel_max)
        + ceiling_term
        + pf_term
    )


def min_inter_event_interval(b: float, thr_c1: float, drive_bound: float) -> float:
    """Analytic floor on the spacing between an agent's communication events.

    The between-event error obeys a linear system with matrix [[0,1],[0,-b]]
    (spectral norm sqrt(1+b^2)) driven through [0,1]^T by an input no larger
    than ``drive_bound``; a Gronwall argument gives

        gap >= ln(1 + c1*||A|| / drive_bound) / ||A||,

    strictly positive for all positive inputs, which rules out accumulation
    of infinitely many events in finite time.
    """
    if b <= 0 or thr_c1 <= 0 or drive_bound <= 0:
        raise ValueError("b, thr_c1 and drive_bound must all be positive")
    norm_a = math.sqrt(1.0 + b * b)
    return math.log1p(thr_c1 * norm_a / drive_bound) / norm_a
