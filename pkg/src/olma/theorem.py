"""Numerical checks of the Hadamard inequality and the entropy-reducing unitary path.

For a correlated covariance ``S`` the diagonal product is strictly larger than
``det(S)``. Diagonalizing with the eigenvector basis reaches ``det(S)``, and the
principal-log path from the identity to that basis passes through unitaries
whose conjugated covariance has a strictly smaller diagonal product.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .entropy import gaussian_marginal_entropy_sum
from .transforms import unitary_log_path


class PreconditionError(ValueError):
    pass


@dataclass
class Theorem1Report:
    diag_product_original: float
    determinant: float
    lambda_grid: list[float]
    diag_product_at_lambda: list[float]
    witness_lambda: float | None
    det_at_lambda: list[float] = field(default_factory=list)
    trace_at_lambda: list[float] = field(default_factory=list)
    offdiag_at_one: float = 0.0
    eigenvalues: list[float] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.diag_product_original - self.determinant

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def random_spd(c: int, rng: np.random.Generator, min_eig: float = 0.1) -> np.ndarray:
    """Random SPD matrix with a random (non-diagonal) eigenbasis."""
    Q, _ = np.linalg.qr(rng.standard_normal((c, c)))
    eig = min_eig + rng.exponential(1.0, size=c)
    S = (Q * eig) @ Q.T
    return (S + S.T) / 2


def sample_correlated_gaussian(cov, l: int, seed: int) -> np.ndarray:
    """``c x l`` matrix whose columns are i.i.d. ``N(0, cov)``.

    Draws ``Z`` from ``numpy.random.default_rng(seed).standard_normal((c, l))``
    (PCG64) and returns ``L @ Z`` with ``L`` the lower Cholesky factor.
    """
    cov = np.asarray(cov, dtype=float)
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not symmetric positive definite") from exc
    Z = np.random.default_rng(seed).standard_normal((cov.shape[0], l))
    return L @ Z


def empirical_covariance(G) -> np.ndarray:
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[1] < 1:
        raise ValueError(f"expected a c x l matrix with l >= 1, got {G.shape}")
    S = G @ G.conj().T / G.shape[1]
    return (S + S.conj().T) / 2


def _check_hermitian(S: np.ndarray, tol: float = 1e-10):
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))))
    if np.max(np.abs(S - S.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian")


def determinant(S: np.ndarray) -> float:
    """Determinant of a Hermitian PSD matrix: Cholesky when PD, eigenvalues otherwise."""
    try:
        L = np.linalg.cholesky(S)
        return float(np.prod(np.real(np.diag(L))) ** 2)
    except np.linalg.LinAlgError:
        return float(np.prod(np.linalg.eigvalsh(S)))


def hadamard_gap(S) -> tuple[float, float, float]:
    S = np.asarray(S)
    _check_hermitian(S)
    diag_product = float(np.prod(np.real(np.diag(S))))
    det = determinant(S)
    return diag_product, det, diag_product - det


def max_correlation(S: np.ndarray) -> float:
    d = np.sqrt(np.real(np.diag(S)))
    R = np.abs(S) / np.outer(d, d)
    np.fill_diagonal(R, 0.0)
    return float(R.max()) if R.size > 1 else 0.0


def ordered_eigh(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by descending eigenvalue, each vector's first nonzero entry real-positive."""
    try:
        w, U = scipy.linalg.eigh(S)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ValueError("eigendecomposition failed") from exc
    order = np.argsort(w)[::-1]
    w, U = w[order], U[:, order].astype(complex)
    for j in range(U.shape[1]):
        col = U[:, j]
        k = np.flatnonzero(np.abs(col) > 1e-12)[0]
        U[:, j] = col * (np.abs(col[k]) / col[k])
    return w, U


def conjugated_diag_product(F: np.ndarray, S: np.ndarray) -> float:
    return float(np.prod(np.real(np.diag(F @ S @ F.conj().T))))


def verify_theorem1(S, grid_size: int = 101) -> Theorem1Report:
    S = np.asarray(S)
    _check_hermitian(S)
    if grid_size < 2:
        raise ValueError(f"grid needs at least 2 points, got {grid_size}")
    if S.shape[0] < 2 or max_correlation(S) <= 1e-6:
        raise PreconditionError("Theorem 1 precondition violated: processes are uncorrelated")
    diag0, det, _ = hadamard_gap(S)
    if det <= 0:
        raise PreconditionError("Theorem 1 precondition violated: covariance is not positive definite")

    w, U = ordered_eigh(S)
    F_v = U.conj().T
    grid = np.linspace(0.0, 1.0, grid_size)
    tol = 1e-9 * diag0
    products, dets, traces = [], [], []
    witness = None
    offdiag = 0.0
    for lam in grid:
        F = unitary_log_path(F_v, float(lam))
        C = F @ S @ F.conj().T
        prod = float(np.prod(np.real(np.diag(C))))
        products.append(prod)
        dets.append(float(np.real(np.linalg.det(C))))
        traces.append(float(np.real(np.trace(C))))
        if witness is None and prod < diag0 - tol:
            witness = float(lam)
        if lam == 1.0:
            offdiag = float(np.max(np.abs(C - np.diag(np.diag(C)))))

    if abs(products[-1] - det) > 1e-8 * det:
        raise ArithmeticError(f"diagonal product at lambda=1 ({products[-1]!r}) differs from det(S) ({det!r})")
    return Theorem1Report(diag0, det, grid.tolist(), products, witness, dets, traces, offdiag, w.tolist())


def entropy_reduction_at_witness(S, report: Theorem1Report, l: int = 1) -> tuple[float, float]:
    """Gaussian marginal entropy sum before and after the witness unitary."""
    if report.witness_lambda is None:
        raise ValueError("report has no witness")
    S = np.asarray(S)
    _, U = ordered_eigh(S)
    F = unitary_log_path(U.conj().T, report.witness_lambda)
    C = F @ S @ F.conj().T
    return gaussian_marginal_entropy_sum(S, l), gaussian_marginal_entropy_sum(np.real(np.diag(C)) * np.eye(len(C)), l)


def theorem_ensemble(trials: int = 200, c_range=(2, 8), grid_size: int = 101, seed: int = 0) -> list[dict]:
    """Run the verifier on seeded random SPD matrices; one summary dict per trial."""
    rng = np.random.default_rng(seed)
    rows = []
    for trial in range(trials):
        c = int(rng.integers(c_range[0], c_range[1] + 1))
        S = random_spd(c, rng)
        rep = verify_theorem1(S, grid_size)
        dets = np.asarray(rep.det_at_lambda)
        rows.append({
            "trial": trial,
            "channels": c,
            "diag_product": rep.diag_product_original,
            "determinant": rep.determinant,
            "gap": rep.gap,
            "witness_lambda": rep.witness_lambda,
            "product_at_one": rep.diag_product_at_lambda[-1],
            "max_det_drift": float(np.max(np.abs(dets - rep.determinant)) / rep.determinant),
            "hadamard_holds": rep.determinant <= rep.diag_product_original,
        })
    return rows
