"""Dense real linear-algebra kernels for the balancing pipeline.

Factorizations (real Schur, SVD, symmetric eigendecomposition) are
delegated to LAPACK through scipy/numpy.  The continuous Lyapunov
equation is solved here directly by Bartels-Stewart: reduce the
coefficient matrix to real Schur form, then back-substitute over the
1x1/2x2 diagonal blocks of the quasi-triangular factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NonConvergence(RuntimeError):
    """An iterative LAPACK factorization exhausted its iteration budget."""


class NotPsd(ValueError):
    """A symmetric matrix has a negative eigenvalue beyond tolerance."""


class UnstableSystem(ValueError):
    """A system matrix has an eigenvalue with nonnegative real part."""


class SingularBlock(RuntimeError):
    """A diagonal block pair in the Lyapunov back-substitution is singular."""


# Relative eigenvalue threshold below which psd_factor drops a mode.
PSD_RANK_DROP = 1e-12
# Most negative eigenvalue tolerated by psd_factor, relative to the largest.
PSD_NEG_TOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-D float array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _as_square(a, name: str = "matrix") -> np.ndarray:
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class SchurForm:
    """Real Schur decomposition A = Q T Q^T.

    Q is orthogonal and T is quasi-upper-triangular with 1x1 blocks for
    real eigenvalues and 2x2 blocks for complex-conjugate pairs.
    """

    q: np.ndarray
    t: np.ndarray


@dataclass(frozen=True, eq=False)
class SvdResult:
    """Thin singular value decomposition M = U diag(sigma) V^T.

    U and V have orthonormal columns; sigma is nonincreasing and
    nonnegative.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def real_schur(a) -> SchurForm:
    """Real Schur decomposition of a square matrix.

    Raises
    ------
    NonConvergence
        If the QR iteration fails to converge (pathological input).
    """
    a = _as_square(a)
    try:
        t, q = scipy.linalg.schur(a, output="real")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK budget
        raise NonConvergence(str(exc)) from exc
    return SchurForm(q=q, t=t)


def _schur_blocks(t: np.ndarray) -> list[tuple[int, int]]:
    """Partition a quasi-triangular matrix into (start, size) diagonal blocks."""
    n = t.shape[0]
    blocks = []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            blocks.append((i, 2))
            i += 2
        else:
            blocks.append((i, 1))
            i += 1
    return blocks


def _block_eigenvalues(t: np.ndarray) -> np.ndarray:
    """Eigenvalues read off the diagonal blocks of a real Schur factor."""
    eigs = []
    for start, size in _schur_blocks(t):
        if size == 1:
            eigs.append(complex(t[start, start]))
        else:
            a, b = t[start, start], t[start, start + 1]
            c, d = t[start + 1, start], t[start + 1, start + 1]
            mu = 0.5 * (a + d)
            disc = 0.25 * (a - d) ** 2 + b * c
            if disc < 0.0:
                w = np.sqrt(-disc)
                eigs.extend([complex(mu, w), complex(mu, -w)])
            else:
                w = np.sqrt(disc)
                eigs.extend([complex(mu + w), complex(mu - w)])
    return np.array(eigs)


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues of a square real matrix, via the real Schur form."""
    return _block_eigenvalues(real_schur(a).t)


def svd(m) -> SvdResult:
    """Thin SVD of a real matrix.

    Raises
    ------
    NonConvergence
        If the SVD iteration fails to converge.
    """
    m = as_matrix(m)
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK budget
        raise NonConvergence(str(exc)) from exc
    return SvdResult(u=u, sigma=s, v=vt.T)


def psd_factor(p) -> np.ndarray:
    """Rank-revealing factor F of a symmetric PSD matrix, P = F F^T.

    Computed from the symmetric eigendecomposition.  Eigenvalues below
    ``PSD_RANK_DROP`` times the largest are truncated, so F has one
    column per numerically significant mode.  Gramians of lightly
    damped systems are routinely semidefinite, which is why this is
    preferred over a Cholesky factorization.

    Raises
    ------
    NotPsd
        If P is not symmetric to 1e-10 (relative) or has a negative
        eigenvalue beyond ``PSD_NEG_TOL`` times the largest magnitude.
    """
    p = _as_square(p, "P")
    pnorm = np.linalg.norm(p)
    if pnorm > 0 and np.linalg.norm(p - p.T) > 1e-10 * pnorm:
        raise NotPsd("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (p + p.T))
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0.0:
        return np.zeros((p.shape[0], 0))
    if w[0] < -PSD_NEG_TOL * scale:
        raise NotPsd(f"negative eigenvalue {w[0]:.3e} beyond tolerance")
    keep = w > PSD_RANK_DROP * scale
    return v[:, keep] * np.sqrt(w[keep])


def _solve_small_sylvester(tpp, tqq, rhs):
    """Solve T_pp Y + Y T_qq^T = rhs for a block pair of size <= 2x2."""
    ps, qs = rhs.shape
    m = np.kron(np.eye(qs), tpp) + np.kron(tqq, np.eye(ps))
    try:
        y = np.linalg.solve(m, rhs.ravel(order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularBlock("degenerate Schur block pair") from exc
    return y.reshape((ps, qs), order="F")


def _quasi_triangular_lyapunov(t: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Solve T Y + Y T^T + W = 0 with T quasi-upper-triangular.

    Block back-substitution: columns are processed last to first, rows
    bottom to top, so every off-block contribution on the right-hand
    side has already been computed.
    """
    n = t.shape[0]
    blocks = _schur_blocks(t)
    y = np.zeros_like(w)
    for q0, qs in reversed(blocks):
        qsl = slice(q0, q0 + qs)
        qe = q0 + qs
        for p0, ps in reversed(blocks):
            psl = slice(p0, p0 + ps)
            pe = p0 + ps
            rhs = -w[psl, qsl].copy()
            if pe < n:
                rhs -= t[psl, pe:] @ y[pe:, qsl]
            if qe < n:
                rhs -= y[psl, qe:] @ t[qsl, qe:].T
            y[psl, qsl] = _solve_small_sylvester(t[psl, psl], t[qsl, qsl], rhs)
    return y


def solve_lyapunov(a, w) -> np.ndarray:
    """Solve A P + P A^T + W = 0 for stable A and symmetric PSD W.

    Bartels-Stewart: one real Schur decomposition of A, then block
    back-substitution.  A residual-correction pass reuses the Schur
    factors whenever the first solve is not already at the 1e-10
    relative residual contract.

    Raises
    ------
    UnstableSystem
        If any eigenvalue of A has nonnegative real part (the Gramian
        does not exist).
    SingularBlock
        On a degenerate block pair during back-substitution.
    """
    a = _as_square(a, "A")
    w = _as_square(w, "W")
    if a.shape != w.shape:
        raise ValueError(f"shape mismatch: A {a.shape} vs W {w.shape}")
    form = real_schur(a)
    eigs = _block_eigenvalues(form.t)
    if eigs.size and eigs.real.max() >= 0.0:
        raise UnstableSystem(
            f"eigenvalue with real part {eigs.real.max():.3e} >= 0"
        )
    q, t = form.q, form.t
    wnorm = np.linalg.norm(w)
    p = np.zeros_like(w)
    resid = w.copy()
    for _ in range(3):
        y = _quasi_triangular_lyapunov(t, q.T @ resid @ q)
        p += q @ y @ q.T
        p = 0.5 * (p + p.T)
        resid = a @ p + p @ a.T + w
        if np.linalg.norm(resid) <= 1e-11 * max(wnorm, 1e-300):
            break
    return p
