"""Polarization states of single photons, EPR pairs and biphotons.

Circular convention: ``R = (H + iV)/sqrt2`` and ``L = (H - iV)/sqrt2``.
A biphoton is two photons in one spatial mode and lives in the symmetric
subspace, with plane coordinates over ``(|2H>, |s>, |2V>)`` where
``|s> = (|HV> + |VH>)/sqrt2``.
"""

from __future__ import annotations

import enum

import numpy as np

from .qmath import (
    EXACT_TOL,
    SQRT1_2,
    as_complex,
    canonical_phase,
    dagger,
    inner,
    symmetric_isometry,
    symmetric_projector,
    tensor_product,
)


class Polarization(enum.Enum):
    H = "H"
    V = "V"
    R = "R"
    L = "L"

    @property
    def family(self) -> str:
        return "plane" if self in (Polarization.H, Polarization.V) else "circular"

    @property
    def partner(self) -> "Polarization":
        """The other member of the same basis."""
        return _PARTNER[self]

    @classmethod
    def coerce(cls, x) -> "Polarization":
        return x if isinstance(x, cls) else cls(str(x).upper())


_PARTNER = {
    Polarization.H: Polarization.V,
    Polarization.V: Polarization.H,
    Polarization.R: Polarization.L,
    Polarization.L: Polarization.R,
}

BASES = {
    "plane": (Polarization.H, Polarization.V),
    "circular": (Polarization.R, Polarization.L),
}


def basis_labels(basis: str) -> tuple[Polarization, Polarization]:
    try:
        return BASES[basis]
    except KeyError:
        raise ValueError(f"basis must be 'plane' or 'circular', not {basis!r}") from None


class PhotonState:
    """Unit-norm polarization amplitudes over ``(H, V)``."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, tol: float = EXACT_TOL):
        amps = as_complex(amplitudes).reshape(-1)
        if amps.shape != (2,):
            raise ValueError("a photon state has two amplitudes")
        if abs(np.linalg.norm(amps) - 1.0) > tol:
            raise ValueError(f"photon state not normalized (norm {np.linalg.norm(amps)})")
        amps.setflags(write=False)
        self.amplitudes = amps

    @classmethod
    def from_angle(cls, theta: float, phase: float = 0.0) -> "PhotonState":
        """``cos(theta)|H> + e^{i phase} sin(theta)|V>``."""
        return cls([np.cos(theta), np.exp(1j * phase) * np.sin(theta)])

    def inner(self, other: "PhotonState") -> complex:
        return inner(self.amplitudes, other.amplitudes)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def canonical(self) -> "PhotonState":
        return PhotonState(canonical_phase(self.amplitudes))

    def same_ray(self, other: "PhotonState", tol: float = EXACT_TOL) -> bool:
        return abs(abs(self.inner(other)) - 1.0) < tol

    def __repr__(self) -> str:
        a, b = self.amplitudes
        return f"PhotonState(({a:.6g}, {b:.6g}))"


def basis_state(label) -> PhotonState:
    label = Polarization.coerce(label)
    return PhotonState(_BASIS_AMPS[label])


_BASIS_AMPS = {
    Polarization.H: (1.0, 0.0),
    Polarization.V: (0.0, 1.0),
    Polarization.R: (SQRT1_2, 1j * SQRT1_2),
    Polarization.L: (SQRT1_2, -1j * SQRT1_2),
}


def orthogonal_of(state: PhotonState) -> PhotonState:
    """The orthogonal polarization, with the first nonzero amplitude real positive."""
    a, b = state.amplitudes
    return PhotonState(canonical_phase([-np.conj(b), np.conj(a)]))


def basis_matrix(basis: str) -> np.ndarray:
    """2x2 unitary whose columns are the basis states in the (H, V) frame."""
    first, second = basis_labels(basis)
    return np.column_stack([basis_state(first).amplitudes, basis_state(second).amplitudes])


def pair_vector(first, second) -> np.ndarray:
    """Product vector ``|first>|second>`` over ``(HH, HV, VH, VV)``."""
    a = first if isinstance(first, PhotonState) else basis_state(first)
    b = second if isinstance(second, PhotonState) else basis_state(second)
    return tensor_product(a.amplitudes, b.amplitudes)


def epr_state() -> np.ndarray:
    """``(|HH> - |VV>)/sqrt2``."""
    return np.array([SQRT1_2, 0.0, 0.0, -SQRT1_2], dtype=np.complex128)


def expand_in_product_basis(pair, basis: str) -> dict[str, complex]:
    """Coefficients of a pair vector over the product basis of ``basis``.

    For the circular basis the keys are ``RR, RL, LR, LL``.
    """
    pair = as_complex(pair)
    first, second = basis_labels(basis)
    out = {}
    for x in (first, second):
        for y in (first, second):
            out[x.value + y.value] = inner(pair_vector(x, y), pair)
    return out


class Biphoton:
    """Unit-norm symmetric two-photon state in plane coordinates ``(|2H>, |s>, |2V>)``."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, tol: float = EXACT_TOL):
        amps = as_complex(amplitudes).reshape(-1)
        if amps.shape != (3,):
            raise ValueError("a biphoton has three amplitudes")
        if abs(np.linalg.norm(amps) - 1.0) > tol:
            raise ValueError(f"biphoton not normalized (norm {np.linalg.norm(amps)})")
        amps.setflags(write=False)
        self.amplitudes = amps

    @classmethod
    def from_pair_vector(cls, pair, tol: float = EXACT_TOL) -> "Biphoton":
        """Build from a symmetric 4-dim pair vector (which must already be normalized)."""
        pair = as_complex(pair)
        if np.linalg.norm(pair - symmetric_projector() @ pair) > tol:
            raise ValueError("pair vector is not symmetric")
        return cls(dagger(symmetric_isometry()) @ pair, tol)

    def pair_vector(self) -> np.ndarray:
        return symmetric_isometry() @ self.amplitudes

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def inner(self, other: "Biphoton") -> complex:
        return inner(self.amplitudes, other.amplitudes)

    def canonical(self) -> "Biphoton":
        return Biphoton(canonical_phase(self.amplitudes))

    def same_ray(self, other: "Biphoton", tol: float = EXACT_TOL) -> bool:
        return abs(abs(self.inner(other)) - 1.0) < tol

    def __repr__(self) -> str:
        return "Biphoton((" + ", ".join(f"{x:.6g}" for x in self.amplitudes) + "))"


def symmetrize_pair(a: PhotonState, b: PhotonState) -> tuple[Biphoton, float]:
    """Project ``a (x) b`` onto the symmetric subspace.

    Returns the normalized biphoton and the squared norm of the projection,
    which is ``(1 + |<a|b>|^2)/2``: 1 for identical photons, 1/2 for
    orthogonal ones.
    """
    sym = symmetric_projector() @ tensor_product(a.amplitudes, b.amplitudes)
    weight = float(np.real(np.vdot(sym, sym)))
    if weight < EXACT_TOL:
        raise ValueError("symmetric projection vanished")
    coords = dagger(symmetric_isometry()) @ sym / np.sqrt(weight)
    return Biphoton(canonical_phase(coords)), weight


def two_photon(label) -> Biphoton:
    """``|2X>``: both photons with polarization ``label``."""
    s = basis_state(label)
    return symmetrize_pair(s, s)[0]


def cross_biphoton(basis: str) -> Biphoton:
    """The wedded unlike pair of a basis: ``|s>`` for plane, ``|s_circ>`` for circular."""
    first, second = basis_labels(basis)
    return symmetrize_pair(basis_state(first), basis_state(second))[0]


def biphoton_basis(basis: str) -> np.ndarray:
    """3x3 unitary whose columns are ``(|2X>, |s_X>, |2Y>)`` in plane coordinates."""
    first, second = basis_labels(basis)
    cols = [two_photon(first), cross_biphoton(basis), two_photon(second)]
    return np.column_stack([c.amplitudes for c in cols])


def biphoton_in_basis(b: Biphoton, basis: str) -> np.ndarray:
    """Coordinates of ``b`` over the biphoton basis of ``basis``."""
    return dagger(biphoton_basis(basis)) @ b.amplitudes


def induced_rotation(u) -> np.ndarray:
    """The 3x3 action of ``u (x) u`` on biphoton coordinates."""
    iso = symmetric_isometry()
    u = as_complex(u)
    return dagger(iso) @ np.kron(u, u) @ iso
