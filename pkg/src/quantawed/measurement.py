"""Polarization analyzers and the H/V beamsplitter statistics of two-light."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensembles import Ensemble
from .qmath import EXACT_TOL, as_complex, dagger, require_density
from .states import Biphoton, PhotonState, Polarization, basis_labels, basis_state

CHANNELS = ("HH", "VV", "HV")


@dataclass(frozen=True)
class OutcomeStats:
    """Counts or probabilities in the ``[HH]``, ``[VV]``, ``[HV]`` channels.

    ``mode`` is ``"probability"`` or ``"counts"``.
    """

    p_HH: float
    p_VV: float
    p_HV: float
    mode: str = "probability"

    def __post_init__(self):
        vals = self.as_array()
        if np.any(vals < -EXACT_TOL):
            raise ValueError("negative channel value")
        if self.mode == "probability" and abs(vals.sum() - 1.0) > EXACT_TOL:
            raise ValueError(f"channel probabilities sum to {vals.sum()}")
        if self.mode not in ("probability", "counts"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_HH, self.p_VV, self.p_HV], dtype=float)

    @property
    def total(self) -> float:
        return float(self.as_array().sum())

    @property
    def ratio_R(self) -> float | None:
        """``([HH] + [VV]) / [HV]``, or ``None`` when ``[HV]`` is empty."""
        if self.p_HV <= 0:
            return None
        return (self.p_HH + self.p_VV) / self.p_HV

    def normalized(self) -> "OutcomeStats":
        v = self.as_array() / self.total
        return OutcomeStats(*v)

    def integer_ratio(self, max_den: int = 1000) -> tuple[int, int, int]:
        """Smallest integers proportional to the three channels, e.g. ``(3, 3, 2)``."""
        fr = [Fraction(float(x)).limit_denominator(max_den) for x in self.as_array()]
        den = math.lcm(*(f.denominator for f in fr))
        ints = [int(f * den) for f in fr]
        g = math.gcd(*ints) or 1
        return tuple(i // g for i in ints)

    def csv_row(self, kind: str) -> list:
        r = self.ratio_R
        return [kind, self.p_HH, self.p_VV, self.p_HV, "" if r is None else r]

    def to_dict(self) -> dict:
        return {
            "p_HH": self.p_HH, "p_VV": self.p_VV, "p_HV": self.p_HV,
            "R": self.ratio_R, "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OutcomeStats":
        return cls(d["p_HH"], d["p_VV"], d["p_HV"], d.get("mode", "probability"))


def single_probs(rho, basis: str) -> dict[str, float]:
    """Born probabilities of a single-photon analyzer in ``basis``."""
    rho = require_density(rho)
    out = {}
    for x in basis_labels(basis):
        a = basis_state(x).amplitudes
        out[x.value] = float(np.real(np.vdot(a, rho @ a)))
    return out


def measure_single(rho, basis: str, seed) -> tuple[Polarization, PhotonState]:
    """Sample an analyzer outcome; the photon collapses to that basis state.

    ``seed`` may be an int or an existing ``numpy.random.Generator``.
    """
    probs = single_probs(rho, basis)
    rng = np.random.default_rng(seed)
    labels = basis_labels(basis)
    p = np.clip([probs[x.value] for x in labels], 0.0, None)
    k = rng.choice(2, p=p / p.sum())
    return labels[k], basis_state(labels[k])


def povm_probs(rho, povm) -> np.ndarray:
    rho = as_complex(rho)
    return np.array([np.real(np.trace(e @ rho)) for e in povm])


def random_povm(dim: int, n_outcomes: int, rng) -> list[np.ndarray]:
    """Random POVM ``S^-1/2 A_k S^-1/2`` with ``A_k`` random positive operators."""
    rng = np.random.default_rng(rng)
    ops = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ops.append(g @ dagger(g))
    total = sum(ops)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(w ** -0.5) @ dagger(v)
    return [inv_sqrt @ a @ inv_sqrt for a in ops]


def hv_split_probs(b: Biphoton) -> OutcomeStats:
    """Channel probabilities of a biphoton at an H/V polarizing beamsplitter."""
    p = np.abs(b.amplitudes) ** 2
    return OutcomeStats(float(p[0]), float(p[2]), float(p[1]))


def stats_from_density(rho) -> OutcomeStats:
    """Channel probabilities from the diagonal of a 3x3 biphoton density."""
    d = np.real(np.diag(as_complex(rho)))
    return OutcomeStats(float(d[0]), float(d[2]), float(d[1]))


def ensemble_stats(e: Ensemble) -> OutcomeStats:
    if e.kind != "two-light":
        raise ValueError("H/V split statistics need two-light")
    acc = np.zeros(3)
    for m in e.members:
        acc += float(m.weight) * hv_split_probs(m.state).as_array()
    return OutcomeStats(*acc)


def split_table(e: Ensemble) -> np.ndarray:
    """Per-member channel probabilities, shape ``(members, 3)`` in ``CHANNELS`` order."""
    return np.array([hv_split_probs(m.state).as_array() for m in e.members])


def draw_two_stage(weights, outcome_table, n: int, rng) -> np.ndarray:
    """Pick a row by ``weights``, then a column by that row of ``outcome_table``.

    Returns the column index of every draw.
    """
    rng = np.random.default_rng(rng)
    weights = np.asarray(weights, dtype=float)
    table = np.asarray(outcome_table, dtype=float)
    rows = rng.choice(len(weights), size=n, p=weights / weights.sum())
    cum = np.cumsum(table / table.sum(axis=1, keepdims=True), axis=1)
    cum[:, -1] = 1.0
    u = rng.random(n)
    return (u[:, None] >= cum[rows]).sum(axis=1)


def sample_stats(e: Ensemble, n: int, seed) -> OutcomeStats:
    """Monte Carlo counts of ``n`` two-light biphotons at the H/V splitter."""
    if n <= 0:
        raise ValueError("n must be positive")
    cols = draw_two_stage(e.weights, split_table(e), n, seed)
    counts = np.bincount(cols, minlength=3)
    return OutcomeStats(int(counts[0]), int(counts[1]), int(counts[2]), mode="counts")
