"""Quantum operations on polarization photons.

* the optimal symmetric 1 -> 2 cloner,
* the parameterized marriage mill that merges two photons into a biphoton,
  with its unwed leakage branch,
* Hong-Ou-Mandel coincidences at a balanced beamsplitter,
* generic Kraus-channel helpers.

The unwed branch of the mill is a single sink direction: the antisymmetric
two-photon state of the row's own basis. The ``HV`` row leaks ``+A_Z`` into it
and the ``VH`` row ``-A_Z`` (likewise ``RL``/``LR``), which is what keeps the
like-pair rows leak-free under linear extension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Union

import numpy as np

from .ensembles import Ensemble
from .qmath import (
    EXACT_TOL,
    SQRT1_2,
    STRUCT_TOL,
    as_complex,
    canonical_phase,
    dagger,
    inner,
    require_density,
    singlet,
    symmetric_isometry,
)
from .states import (
    Biphoton,
    PhotonState,
    Polarization,
    basis_labels,
    cross_biphoton,
    orthogonal_of,
    pair_vector,
    symmetrize_pair,
    two_photon,
)

SPEC_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Kraus channels


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_complex(k) for k in self.operators)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        if len({k.shape for k in ops}) != 1 or ops[0].ndim != 2:
            raise ValueError("Kraus operators must share one 2-d shape")
        object.__setattr__(self, "operators", ops)

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = as_complex(rho)
        return sum(k @ rho @ dagger(k) for k in self.operators)

    def completeness(self) -> np.ndarray:
        return sum(dagger(k) @ k for k in self.operators)


def validate_channel(c: KrausChannel, tol: float = STRUCT_TOL) -> str:
    """Classify as ``"complete"``, ``"trace-decreasing"`` or ``"invalid"``."""
    m = c.completeness()
    if np.max(np.abs(m - dagger(m))) > tol:
        return "invalid"
    evals = np.linalg.eigvalsh(0.5 * (m + dagger(m)))
    if evals[-1] > 1 + tol:
        return "invalid"
    if np.max(np.abs(m - np.eye(c.dim_in))) <= tol:
        return "complete"
    return "trace-decreasing"


def choi_matrix(linear_map, dim_in: int) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) map(|i><j|)`` of a linear map on operators."""
    blocks = []
    for i in range(dim_in):
        row = []
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=np.complex128)
            e[i, j] = 1.0
            row.append(as_complex(linear_map(e)))
        blocks.append(row)
    return np.block(blocks)


def kraus_from_map(linear_map, dim_in: int, tol: float = STRUCT_TOL) -> KrausChannel:
    """Numerically decompose a completely positive map into Kraus operators."""
    choi = choi_matrix(linear_map, dim_in)
    dim_out = choi.shape[0] // dim_in
    evals, evecs = np.linalg.eigh(0.5 * (choi + dagger(choi)))
    if evals[0] < -tol:
        raise ValueError("map is not completely positive")
    ops = []
    for lam, v in zip(evals, evecs.T):
        if lam > tol:
            # v = sum_i |i> (x) K|i>, so column i of K is the i-th block of v
            ops.append(np.sqrt(lam) * v.reshape(dim_in, dim_out).T)
    return KrausChannel(tuple(ops))


def random_channel(dim_in: int, dim_out: int, n_ops: int, rng) -> KrausChannel:
    """Random complete channel from a Haar-ish isometry ``dim_in -> n_ops*dim_out``."""
    rng = np.random.default_rng(rng)
    big = n_ops * dim_out
    if big < dim_in:
        raise ValueError("n_ops * dim_out must be at least dim_in for a complete channel")
    z = rng.standard_normal((big, dim_in)) + 1j * rng.standard_normal((big, dim_in))
    q, _ = np.linalg.qr(z)
    return KrausChannel(tuple(q[k * dim_out:(k + 1) * dim_out] for k in range(n_ops)))


# ---------------------------------------------------------------------------
# Optimal cloner


def mandel_clone(rho) -> np.ndarray:
    """Optimal universal 1 -> 2 cloner.

    ``rho -> (2/3) S (rho (x) I) S`` restricted to the symmetric subspace,
    returned as a 3x3 density matrix in plane biphoton coordinates.
    """
    rho = require_density(rho)
    if rho.shape != (2, 2):
        raise ValueError("cloner input must be a single-photon density matrix")
    return clone_map(rho)


def clone_map(op) -> np.ndarray:
    """The cloner as a bare linear map on 2x2 operators (no density checks)."""
    iso = symmetric_isometry()
    return (2.0 / 3.0) * dagger(iso) @ np.kron(as_complex(op), np.eye(2)) @ iso


def cloner_channel() -> KrausChannel:
    """Closed-form Kraus operators ``sqrt(2/3) B^dag (I (x) |j>)`` of the cloner."""
    iso_dag = dagger(symmetric_isometry())
    ops = []
    for j in range(2):
        e = np.zeros((2, 1))
        e[j, 0] = 1.0
        ops.append(np.sqrt(2.0 / 3.0) * iso_dag @ np.kron(np.eye(2), e))
    return KrausChannel(tuple(ops))


def clone_branches(state: PhotonState, tol: float = EXACT_TOL) -> list[tuple[float, Biphoton]]:
    """Eigen-branches of the cloner output for a pure input, largest first."""
    out = mandel_clone(state.density())
    evals, evecs = np.linalg.eigh(out)
    order = np.argsort(evals)[::-1]
    return [
        (float(evals[k]), Biphoton(canonical_phase(evecs[:, k])))
        for k in order
        if evals[k] > tol
    ]


def wrong_polarization_probability(state: PhotonState) -> float:
    """Weight of the ``|Z Z#>`` biphoton in the clone of ``|Z>``."""
    wrong, _ = symmetrize_pair(state, orthogonal_of(state))
    out = mandel_clone(state.density())
    return float(np.real(inner(wrong.amplitudes, out @ wrong.amplitudes)))


def clone_ensemble(e: Ensemble) -> Ensemble:
    """Clone every member of one-light, expanding each into its eigen-branches."""
    if e.kind != "one-light":
        raise ValueError("cloner input must be one-light")
    items = []
    for m in e.members:
        for lam, b in clone_branches(m.state):
            same = b.same_ray(symmetrize_pair(m.state, m.state)[0], 1e-9)
            items.append((float(m.weight) * lam, b, f"{m.tag}:{'same' if same else 'wrong'}"))
    return Ensemble.of(items).merged()


# ---------------------------------------------------------------------------
# Marriage mill


class UnwedTag:
    """Outcome in which the two photons stay separate."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNWED"


UNWED = UnwedTag()

_AMP_FIELDS = ("A_H", "A_V", "A_M", "A_N", "A_R", "A_L", "A_E", "A_F", "A_Z")


@dataclass(frozen=True)
class MarriageMillSpec:
    """Amplitudes of the eight mill rows plus the unwed leakage amplitude.

    Plane rows: ``HH -> A_H|2H>``, ``VV -> A_V|2V>``, ``HV -> A_M|s>``,
    ``VH -> A_N|s>``. Circular rows use ``A_R, A_L, A_E, A_F`` likewise.
    """

    A_H: complex = 0j
    A_V: complex = 0j
    A_M: complex = 0j
    A_N: complex = 0j
    A_R: complex = 0j
    A_L: complex = 0j
    A_E: complex = 0j
    A_F: complex = 0j
    A_Z: complex = 0j

    def __post_init__(self):
        for f in fields(self):
            v = complex(getattr(self, f.name))
            if not np.isfinite(v):
                raise ValueError(f"{f.name} is not finite")
            object.__setattr__(self, f.name, v)

    @classmethod
    def family(cls, same: complex, cross: complex, leak: complex | None = None) -> "MarriageMillSpec":
        """All like rows ``same``, all unlike rows ``cross``.

        ``leak`` defaults to the real amplitude that conserves probability on
        the unlike rows.
        """
        if leak is None:
            leak = np.sqrt(max(0.0, 1.0 - abs(cross) ** 2))
        return cls(same, same, cross, cross, same, same, cross, cross, leak)

    @classmethod
    def canonical(cls) -> "MarriageMillSpec":
        """The linear mill: like pairs always wed, unlike pairs half the time."""
        return cls.family(1.0, SQRT1_2)

    @classmethod
    def perfect(cls) -> "MarriageMillSpec":
        """Hypothetical mill that weds every pair; not linear."""
        return cls.family(1.0, 1.0, 0.0)

    def amplitudes(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in _AMP_FIELDS], dtype=np.complex128)

    @classmethod
    def from_amplitudes(cls, amps) -> "MarriageMillSpec":
        amps = as_complex(amps).reshape(-1)
        if amps.shape == (8,):
            amps = np.append(amps, 0j)
        if amps.shape != (9,):
            raise ValueError("expected 8 or 9 amplitudes")
        return cls(*amps)

    def scaled(self, factor: complex) -> "MarriageMillSpec":
        return MarriageMillSpec.from_amplitudes(self.amplitudes() * factor)

    def row(self, first, second) -> tuple[complex, complex]:
        """``(wed amplitude, leak amplitude)`` of the row for this ordered pair."""
        first = Polarization.coerce(first)
        second = Polarization.coerce(second)
        if first.family != second.family:
            raise ValueError(f"no mill row for mixed-basis pair {first.value}{second.value}")
        key = first.value + second.value
        wed = {
            "HH": self.A_H, "VV": self.A_V, "HV": self.A_M, "VH": self.A_N,
            "RR": self.A_R, "LL": self.A_L, "RL": self.A_E, "LR": self.A_F,
        }[key]
        if first is second:
            return wed, 0j
        leak = self.A_Z if first in (Polarization.H, Polarization.R) else -self.A_Z
        return wed, leak

    def admissible(self, tol: float = STRUCT_TOL) -> bool:
        for x, y in _ALL_ROWS:
            wed, leak = self.row(x, y)
            if abs(wed) ** 2 + abs(leak) ** 2 > 1 + tol:
                return False
        return True

    def to_record(self) -> dict:
        rec = {"schema_version": SPEC_SCHEMA_VERSION}
        for k in _AMP_FIELDS:
            v = getattr(self, k)
            rec[k] = [v.real, v.imag]
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "MarriageMillSpec":
        if not isinstance(rec, dict):
            raise ValueError("mill spec must be a JSON object")
        unknown = set(rec) - set(_AMP_FIELDS) - {"schema_version"}
        if unknown:
            raise ValueError(f"unknown mill spec keys: {sorted(unknown)}")
        vals = {}
        for k in _AMP_FIELDS:
            raw = rec.get(k, [0.0, 0.0])
            if isinstance(raw, (int, float)):
                raw = [raw, 0.0]
            if not (isinstance(raw, (list, tuple)) and len(raw) == 2
                    and all(isinstance(x, (int, float)) for x in raw)):
                raise ValueError(f"{k} must be a [re, im] pair of numbers, got {raw!r}")
            vals[k] = complex(raw[0], raw[1])
        return cls(**vals)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_record(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "MarriageMillSpec":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ValueError(f"cannot read mill spec {path}: {exc}") from exc
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"mill spec {path} is not valid JSON: {exc}") from exc
        return cls.from_record(rec)


_ALL_ROWS = [
    (Polarization(a), Polarization(b))
    for a, b in ("HH", "HV", "VH", "VV", "RR", "RL", "LR", "LL")
]

MillResult = Union[Biphoton, UnwedTag]


@dataclass(frozen=True)
class MillOutcome:
    branches: tuple[tuple[float, MillResult], ...]

    def __post_init__(self):
        p = np.array([b[0] for b in self.branches])
        if np.any(p < 0) or abs(p.sum() - 1.0) > EXACT_TOL:
            raise ValueError(f"branch probabilities {p} are not a distribution")

    @property
    def wed_probability(self) -> float:
        return sum(p for p, r in self.branches if r is not UNWED)

    @property
    def unwed_probability(self) -> float:
        return sum(p for p, r in self.branches if r is UNWED)


def mill_apply(spec: MarriageMillSpec, first, second, prune: float = 1e-15) -> MillOutcome:
    """Feed the ordered basis pair ``first, second`` to the mill.

    The wed biphoton gets probability ``|A_row|^2``; whatever is left goes to
    the unwed branch.
    """
    first = Polarization.coerce(first)
    second = Polarization.coerce(second)
    wed, _ = spec.row(first, second)
    p_wed = min(1.0, abs(wed) ** 2)
    if first is second:
        result = two_photon(first)
    else:
        result = cross_biphoton(first.family)
    branches = [(p_wed, result), (1.0 - p_wed, UNWED)]
    return MillOutcome(tuple(b for b in branches if b[0] > prune))


def mill_matrix(spec: MarriageMillSpec) -> np.ndarray:
    """4x4 map from ``(HH, HV, VH, VV)`` to ``(|2H>, |s>, |2V>, unwed)`` from the plane rows."""
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = spec.A_H
    m[1, 1], m[3, 1] = spec.row("H", "V")
    m[1, 2], m[3, 2] = spec.row("V", "H")
    m[2, 3] = spec.A_V
    return m


def mill_linear_extension(spec: MarriageMillSpec, pair) -> np.ndarray:
    """Apply the plane rows linearly to an arbitrary pair vector.

    Output amplitudes are over ``(|2H>, |s>, |2V>, unwed)``, the last along the
    plane singlet ``(|HV> - |VH>)/sqrt2``. They are not renormalized.
    """
    pair = as_complex(pair).reshape(-1)
    if pair.shape != (4,):
        raise ValueError("pair vector must have 4 amplitudes")
    return mill_matrix(spec) @ pair


def row_prediction(spec: MarriageMillSpec, first, second) -> np.ndarray:
    """What the row for ``first, second`` itself claims, in the extension's output frame."""
    first = Polarization.coerce(first)
    second = Polarization.coerce(second)
    wed, leak = spec.row(first, second)
    out = np.zeros(4, dtype=np.complex128)
    if first is second:
        out[:3] = wed * two_photon(first).amplitudes
    else:
        x, y = basis_labels(first.family)
        out[:3] = wed * cross_biphoton(first.family).amplitudes
        # unwed sink of this basis, (|XY> - |YX>)/sqrt2, seen along the plane singlet
        sink = (pair_vector(x, y) - pair_vector(y, x)) * SQRT1_2
        out[3] = leak * inner(singlet(), sink)
    return out


# ---------------------------------------------------------------------------
# Hong-Ou-Mandel


def hom_coincidence(a: PhotonState, b: PhotonState) -> float:
    """Probability of one photon in each output port of a balanced beamsplitter."""
    return 0.5 * (1.0 - abs(a.inner(b)) ** 2)
