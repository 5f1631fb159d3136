"""Incoherent mixtures of photons ("one-light") and biphotons ("two-light")."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .qmath import EXACT_TOL
from .states import (
    Biphoton,
    PhotonState,
    basis_labels,
    basis_state,
    cross_biphoton,
    two_photon,
)

State = Union[PhotonState, Biphoton]
Weight = Union[Fraction, float]


class TwoLightKind(enum.Enum):
    PUP2 = "PUP2"
    CUP2 = "CUP2"
    FPUP = "FPUP"
    FCUP = "FCUP"

    @property
    def source_basis(self) -> str:
        return "plane" if self in (TwoLightKind.PUP2, TwoLightKind.FPUP) else "circular"

    @property
    def fat(self) -> bool:
        return self in (TwoLightKind.FPUP, TwoLightKind.FCUP)


@dataclass(frozen=True)
class Member:
    weight: Weight
    state: State
    tag: str


@dataclass(frozen=True)
class Ensemble:
    """Weighted list of pure states, all photons or all biphotons.

    Weights may be :class:`fractions.Fraction` to keep table values exact;
    they are converted to float only at use.
    """

    members: tuple[Member, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        kinds = {type(m.state) for m in self.members}
        if len(kinds) != 1:
            raise ValueError("ensemble mixes photons and biphotons")
        w = self.weights
        if np.any(w < 0):
            raise ValueError("negative ensemble weight")
        if abs(w.sum() - 1.0) > EXACT_TOL:
            raise ValueError(f"ensemble weights sum to {w.sum()}, not 1")

    @classmethod
    def of(cls, items) -> "Ensemble":
        """Build from ``(weight, state, tag)`` triples."""
        return cls(tuple(Member(w, s, t) for w, s, t in items))

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(m.weight) for m in self.members])

    @property
    def states(self) -> list[State]:
        return [m.state for m in self.members]

    @property
    def tags(self) -> list[str]:
        return [m.tag for m in self.members]

    @property
    def kind(self) -> str:
        return "one-light" if isinstance(self.members[0].state, PhotonState) else "two-light"

    @property
    def dim(self) -> int:
        return 2 if self.kind == "one-light" else 3

    def __len__(self) -> int:
        return len(self.members)

    def merged(self, tol: float = EXACT_TOL) -> "Ensemble":
        """Combine members that are the same ray, keeping the first tag."""
        out: list[list] = []
        for m in self.members:
            for slot in out:
                if slot[1].same_ray(m.state, tol):
                    slot[0] = slot[0] + m.weight
                    break
            else:
                out.append([m.weight, m.state, m.tag])
        return Ensemble.of(out)

    def postselect(self, keep) -> "Ensemble":
        """Keep members where ``keep(member)`` is true and renormalize."""
        kept = [m for m in self.members if keep(m)]
        total = sum(m.weight for m in kept)
        if not kept or float(total) <= 0:
            raise ValueError("post-selection kept nothing")
        return Ensemble.of((m.weight / total, m.state, m.tag) for m in kept)


def one_light(basis: str) -> Ensemble:
    """Unpolarized one-light: equal mixture of the two states of ``basis``."""
    half = Fraction(1, 2)
    return Ensemble.of((half, basis_state(x), x.value) for x in basis_labels(basis))


def two_light(kind) -> Ensemble:
    """One of the four two-light types of the H/V beamsplitter table.

    Ordinary two-light weights its three biphotons equally. The Fat variants
    come from wedding every ordered pair of one-light photons; the two
    orderings of an unlike pair give the same biphoton, so the cross term
    carries weight 1/2.
    """
    kind = TwoLightKind(kind) if not isinstance(kind, TwoLightKind) else kind
    first, second = basis_labels(kind.source_basis)
    if kind.fat:
        w_like, w_cross = Fraction(1, 4), Fraction(1, 2)
    else:
        w_like = w_cross = Fraction(1, 3)
    cross_tag = first.value + second.value
    return Ensemble.of(
        [
            (w_like, two_photon(first), 2 * first.value),
            (w_like, two_photon(second), 2 * second.value),
            (w_cross, cross_biphoton(kind.source_basis), cross_tag),
        ]
    )


def ensemble_density(e: Ensemble) -> np.ndarray:
    """``sum_i w_i |psi_i><psi_i|`` in the member space (2- or 3-dim)."""
    rho = np.zeros((e.dim, e.dim), dtype=np.complex128)
    for m in e.members:
        rho += float(m.weight) * m.state.density()
    return rho


def sample_sequence(e: Ensemble, n: int, seed) -> list[tuple[State, str]]:
    """``n`` i.i.d. members drawn by weight; a pure function of ``(e, n, seed)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(e), size=n, p=e.weights)
    return [(e.members[i].state, e.members[i].tag) for i in idx]
