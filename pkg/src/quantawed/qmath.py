"""Small dense complex linear algebra for one and two polarization qubits.

Everything here works on plain ``numpy`` arrays. Two-photon product vectors
always use the ordering ``(HH, HV, VH, VV)``, first photon as the slow index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STRUCT_TOL = 1e-10
EXACT_TOL = 1e-12

SQRT1_2 = 1.0 / np.sqrt(2.0)

PAIR_LABELS = ("HH", "HV", "VH", "VV")


def as_complex(x) -> np.ndarray:
    """Return ``x`` as a finite complex128 array, raising on NaN/Inf or empty input."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.size == 0:
        raise ValueError("empty operand")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries")
    return arr


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the slow index.

    Works for vector-vector and matrix-matrix operands; dimensions multiply.
    """
    a = as_complex(a)
    b = as_complex(b)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise ValueError("operands must both be vectors or both be matrices")
    return np.kron(a, b)


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def ket_bra(ket, bra=None) -> np.ndarray:
    """Outer product ``|ket><bra|``; ``bra`` defaults to ``ket``."""
    ket = as_complex(ket)
    bra = ket if bra is None else as_complex(bra)
    return np.outer(ket, np.conj(bra))


def inner(a, b) -> complex:
    """``<a|b>``, conjugating the left argument."""
    return complex(np.vdot(as_complex(a), as_complex(b)))


def normalize(v) -> np.ndarray:
    v = as_complex(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def canonical_phase(v, tol: float = EXACT_TOL) -> np.ndarray:
    """Fix the global phase so the first non-negligible amplitude is real positive."""
    v = as_complex(v)
    for x in v:
        if abs(x) > tol:
            return v * (abs(x) / x)
    return v.copy()


def equal_up_to_phase(a, b, tol: float = EXACT_TOL) -> bool:
    a = as_complex(a)
    b = as_complex(b)
    return abs(abs(inner(a, b)) - np.linalg.norm(a) * np.linalg.norm(b)) < tol


def swap_operator() -> np.ndarray:
    """Exchange operator of two qubits in the ``(HH, HV, VH, VV)`` ordering."""
    return np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
    )


def symmetric_projector() -> np.ndarray:
    """Rank-3 projector ``(I + SWAP)/2`` onto the two-qubit symmetric subspace."""
    return 0.5 * (np.eye(4, dtype=np.complex128) + swap_operator())


def symmetric_isometry() -> np.ndarray:
    """4x3 isometry whose columns are ``|HH>``, ``(|HV>+|VH>)/sqrt2``, ``|VV>``.

    Its adjoint maps symmetric pair vectors onto biphoton coordinates
    ``(|2H>, |s>, |2V>)``.
    """
    b = np.zeros((4, 3), dtype=np.complex128)
    b[0, 0] = 1.0
    b[1, 1] = b[2, 1] = SQRT1_2
    b[3, 2] = 1.0
    return b


def singlet() -> np.ndarray:
    """The antisymmetric pair vector ``(|HV> - |VH>)/sqrt2``."""
    return np.array([0.0, SQRT1_2, -SQRT1_2, 0.0], dtype=np.complex128)


def partial_trace(rho, traced: str = "second") -> np.ndarray:
    """Reduce a 4x4 two-qubit operator to 2x2 by tracing out one photon.

    Args:
        rho: operator over ``(HH, HV, VH, VV)``.
        traced: ``"first"`` or ``"second"``, the subsystem summed over.
    """
    rho = as_complex(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 operator, got shape {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)
    if traced == "second":
        return np.einsum("ijkj->ik", r)
    if traced == "first":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"traced must be 'first' or 'second', not {traced!r}")


@dataclass(frozen=True)
class DensityVerdict:
    """Outcome of :func:`validate_density`; ``violations`` is empty when valid."""

    violations: tuple[str, ...] = field(default_factory=tuple)
    min_eigenvalue: float = 0.0
    trace: complex = 1.0

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate_density(rho, tol: float = STRUCT_TOL) -> DensityVerdict:
    """Check Hermiticity, unit trace and positivity of ``rho`` against ``tol``."""
    rho = as_complex(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    violations = []
    if np.max(np.abs(rho - dagger(rho))) > tol:
        violations.append("non-Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol:
        violations.append("trace!=1")
    evals = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    min_ev = float(evals[0])
    if min_ev < -tol:
        violations.append("negative eigenvalue")
    return DensityVerdict(tuple(violations), min_ev, tr)


def require_density(rho, tol: float = STRUCT_TOL) -> np.ndarray:
    rho = as_complex(rho)
    verdict = validate_density(rho, tol)
    if not verdict:
        raise ValueError(f"invalid density matrix: {', '.join(verdict.violations)}")
    return rho


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_ket(dim: int, rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_density(dim: int, rng, rank: int | None = None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho)
