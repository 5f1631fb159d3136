"""Linearity check of marriage-mill specs and the resulting no-wedding bound.

A mill is consistent with linear superposition when the plane rows, extended
linearly to the circular product inputs ``RR, LL, RL, LR``, reproduce exactly
what the circular rows claim. The residuals are linear in the eight row
amplitudes, so the admissible family is the null space of a 16x8 complex
matrix, which is solved here directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .channels import (
    UNWED,
    MarriageMillSpec,
    mill_apply,
    mill_linear_extension,
    row_prediction,
)
from .ensembles import Ensemble, ensemble_density, one_light, two_light
from .measurement import OutcomeStats, ensemble_stats
from .qmath import STRUCT_TOL
from .states import Polarization, basis_labels, pair_vector

CIRCULAR_INPUTS = ("RR", "LL", "RL", "LR")
SAME_FIELDS = ("A_H", "A_V", "A_R", "A_L")
CROSS_FIELDS = ("A_M", "A_N", "A_E", "A_F")
ROW_FIELDS = ("A_H", "A_V", "A_M", "A_N", "A_R", "A_L", "A_E", "A_F")
REPORT_SCHEMA_VERSION = 1


def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def same_amplitude(spec: MarriageMillSpec) -> complex:
    return complex(np.mean([getattr(spec, k) for k in SAME_FIELDS]))


def cross_amplitude(spec: MarriageMillSpec) -> complex:
    return complex(np.mean([getattr(spec, k) for k in CROSS_FIELDS]))


@dataclass(frozen=True)
class ResidualReport:
    residuals: dict[str, np.ndarray]
    norm: float
    A_S: complex
    A_O: complex
    ratio: float | None

    def text(self) -> str:
        lines = ["linearity residuals (plane-row extension minus circular-row claim):"]
        for key, r in self.residuals.items():
            comps = ", ".join(f"{z.real:+.3e}{z.imag:+.3e}j" for z in r)
            lines.append(f"  {key}: [{comps}]")
        lines.append(f"residual norm: {self.norm:.6e}")
        lines.append(f"A_S (mean like amplitude): {self.A_S:.6g}")
        lines.append(f"A_O (mean unlike amplitude): {self.A_O:.6g}")
        lines.append(
            "|A_O|^2/|A_S|^2: " + ("undefined" if self.ratio is None else f"{self.ratio:.12g}")
        )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "residuals": {k: [_cx(z) for z in v] for k, v in self.residuals.items()},
            "norm": self.norm,
            "A_S": _cx(self.A_S),
            "A_O": _cx(self.A_O),
            "ratio": self.ratio,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        return cls(
            {k: np.array([complex(*z) for z in v]) for k, v in d["residuals"].items()},
            d["norm"],
            complex(*d["A_S"]),
            complex(*d["A_O"]),
            d["ratio"],
        )


def build_residuals(spec: MarriageMillSpec) -> ResidualReport:
    """Compare the linear extension of the plane rows with the circular rows."""
    res = {}
    for key in CIRCULAR_INPUTS:
        x, y = Polarization(key[0]), Polarization(key[1])
        extended = mill_linear_extension(spec, pair_vector(x, y))
        res[key] = extended - row_prediction(spec, x, y)
    norm = float(np.sqrt(sum(np.vdot(r, r).real for r in res.values())))
    a_s, a_o = same_amplitude(spec), cross_amplitude(spec)
    ratio = abs(a_o) ** 2 / abs(a_s) ** 2 if abs(a_s) > 0 else None
    return ResidualReport(res, norm, a_s, a_o, ratio)


def residual_norm(spec: MarriageMillSpec) -> float:
    return build_residuals(spec).norm


def residual_matrix(leak: complex = 0j) -> np.ndarray:
    """The residual map from the eight row amplitudes to the 16 residual components.

    Built column by column from :func:`build_residuals`, so it encodes exactly
    the same physics.
    """
    cols = []
    for k in range(8):
        amps = np.zeros(9, dtype=np.complex128)
        amps[k] = 1.0
        amps[8] = leak
        rep = build_residuals(MarriageMillSpec.from_amplitudes(amps))
        base = build_residuals(MarriageMillSpec(A_Z=leak))
        cols.append(np.concatenate([rep.residuals[i] - base.residuals[i] for i in CIRCULAR_INPUTS]))
    return np.column_stack(cols)


@dataclass(frozen=True)
class ConstraintFamily:
    """Solution set of the linearity residuals, normalized to ``A_S = 1``."""

    null_dimension: int
    direction: np.ndarray
    same_spread: float
    cross_spread: float
    ratio: float
    relative_phase_free: bool
    leak_free: bool
    deficit: float
    singular_values: np.ndarray
    lstsq_ratio: float
    lstsq_residual: float

    def spec(self, same: complex = 1.0, leak: complex | None = None) -> MarriageMillSpec:
        amps = self.direction * same
        cross = amps[2]
        if leak is None:
            leak = np.sqrt(max(0.0, 1.0 - abs(cross) ** 2))
        return MarriageMillSpec.from_amplitudes(np.append(amps, leak))

    def to_dict(self) -> dict:
        return {
            "null_dimension": self.null_dimension,
            "direction": {k: _cx(z) for k, z in zip(ROW_FIELDS, self.direction)},
            "same_spread": self.same_spread,
            "cross_spread": self.cross_spread,
            "ratio": self.ratio,
            "relative_phase_free": self.relative_phase_free,
            "leak_free": self.leak_free,
            "deficit": self.deficit,
            "singular_values": [float(s) for s in self.singular_values],
            "lstsq_ratio": self.lstsq_ratio,
            "lstsq_residual": self.lstsq_residual,
        }

    def text(self) -> str:
        d = self.direction
        return "\n".join([
            f"null space dimension: {self.null_dimension}",
            "family (A_S = 1): A_H=A_V=A_R=A_L="
            + f"{d[0]:.12g}, A_M=A_N=A_E=A_F={d[2]:.12g}",
            f"spread of like amplitudes: {self.same_spread:.3e}",
            f"spread of unlike amplitudes: {self.cross_spread:.3e}",
            f"|A_O|^2/|A_S|^2: {self.ratio:.12g}",
            f"relative phase A_O/A_S free: {self.relative_phase_free}",
            f"leakage amplitude A_Z constrained by linearity: {not self.leak_free}",
            f"unwed probability for unlike pairs at |A_S|=1: {self.deficit:.12g}",
            f"least-squares cross-check ratio: {self.lstsq_ratio:.12g} "
            f"(residual {self.lstsq_residual:.3e})",
        ])


# order of MarriageMillSpec amplitudes: A_H A_V A_M A_N A_R A_L A_E A_F
_SAME_IDX = [0, 1, 4, 5]
_CROSS_IDX = [2, 3, 6, 7]


def _lstsq_crosscheck(m: np.ndarray, rng, starts: int = 8) -> tuple[float, float]:
    """Minimize the residual with ``A_H = 1`` pinned, from random starts."""
    rng = np.random.default_rng(rng)

    def fun(x):
        free = x[:7] + 1j * x[7:]
        a = np.concatenate([[1.0], free])
        r = m @ a
        return np.concatenate([r.real, r.imag])

    best = None
    for _ in range(starts):
        sol = least_squares(fun, rng.uniform(-1, 1, 14), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
    a = np.concatenate([[1.0], best.x[:7] + 1j * best.x[7:]])
    ratio = float(np.mean(np.abs(a[_CROSS_IDX]) ** 2) / np.mean(np.abs(a[_SAME_IDX]) ** 2))
    return ratio, float(np.sqrt(2 * best.cost))


def solve_constraint_family(tolerance: float = STRUCT_TOL, seed=0) -> ConstraintFamily:
    """Solve the linearity residuals for the admissible mill family.

    The null space comes from an SVD of :func:`residual_matrix`; a randomized
    least-squares descent supplies an independent cross-check of the ratio.
    Phase freedom and leak freedom are probed on the residual function itself.
    """
    m = residual_matrix()
    _, sv, vh = np.linalg.svd(m)
    null = vh[sv < tolerance].conj().T if sv.size else vh.conj().T
    null_dim = int(null.shape[1])
    if null_dim != 1:
        raise RuntimeError(f"expected a one-dimensional family, found {null_dim}")
    v = null[:, 0]
    v = v / v[0]
    same = v[_SAME_IDX]
    cross = v[_CROSS_IDX]
    ratio = float(np.mean(np.abs(cross) ** 2) / np.mean(np.abs(same) ** 2))

    base = MarriageMillSpec.from_amplitudes(np.append(v, 0))
    rotated = v.copy()
    rotated[_CROSS_IDX] *= np.exp(0.5j)
    phase_free = residual_norm(MarriageMillSpec.from_amplitudes(np.append(rotated, 0))) < tolerance
    leaky = MarriageMillSpec.from_amplitudes(np.append(v, 0.3 - 0.4j))
    leak_free = abs(residual_norm(leaky) - residual_norm(base)) < tolerance

    lsq_ratio, lsq_res = _lstsq_crosscheck(m, seed)
    return ConstraintFamily(
        null_dimension=null_dim,
        direction=v,
        same_spread=float(np.max(np.abs(same - same[0]))),
        cross_spread=float(np.max(np.abs(cross - cross[0]))),
        ratio=ratio,
        relative_phase_free=bool(phase_free),
        leak_free=bool(leak_free),
        deficit=float(1.0 - abs(cross[0]) ** 2),
        singular_values=sv,
        lstsq_ratio=lsq_ratio,
        lstsq_residual=lsq_res,
    )


def on_manifold(spec: MarriageMillSpec, tolerance: float = STRUCT_TOL) -> bool:
    return residual_norm(spec) < tolerance


def probability_deficit(spec: MarriageMillSpec, tolerance: float = STRUCT_TOL) -> float:
    """Unwed probability an on-manifold mill must leave for unlike pairs, ``1 - |A_O|^2``."""
    if not on_manifold(spec, tolerance):
        raise ValueError("spec is not consistent with linearity")
    if abs(same_amplitude(spec)) > 1 + tolerance:
        raise ValueError("|A_S| exceeds 1")
    return 1.0 - abs(cross_amplitude(spec)) ** 2


def random_spec(rng) -> MarriageMillSpec:
    """Eight row amplitudes uniform on the unit polydisc; no leakage."""
    rng = np.random.default_rng(rng)
    r = np.sqrt(rng.random(8))
    phi = rng.uniform(0, 2 * np.pi, 8)
    return MarriageMillSpec.from_amplitudes(r * np.exp(1j * phi))


def random_sweep(n: int, seed) -> np.ndarray:
    """Residual norms of ``n`` random polydisc specs."""
    rng = np.random.default_rng(seed)
    m = residual_matrix()
    r = np.sqrt(rng.random((n, 8)))
    phi = rng.uniform(0, 2 * np.pi, (n, 8))
    amps = r * np.exp(1j * phi)
    return np.linalg.norm(amps @ m.T, axis=1)


@dataclass(frozen=True)
class FatLightCertificate:
    source: str
    ensemble: Ensemble
    density: np.ndarray
    reference_density: np.ndarray
    max_difference: float
    ordinary: bool
    stats: OutcomeStats
    wed_fraction: float


def wed_consecutive(spec: MarriageMillSpec, source: str) -> tuple[Ensemble, float]:
    """Wed ordered photon pairs of ``one_light(source)`` and keep the wed branches.

    Returns the renormalized two-light ensemble and the fraction of pairs wed.
    """
    first, second = basis_labels(source)
    items = []
    for x in (first, second):
        for y in (first, second):
            for p, result in mill_apply(spec, x, y).branches:
                if result is not UNWED:
                    items.append([0.25 * p, result, x.value + y.value])
    wed = sum(i[0] for i in items)
    if wed <= 0:
        raise ValueError("mill weds nothing")
    for i in items:
        i[0] /= wed
    return Ensemble.of(items).merged(), float(wed)


def certify_no_fat_light(
    spec: MarriageMillSpec, source: str, force: bool = False, tolerance: float = STRUCT_TOL
) -> FatLightCertificate:
    """Wed consecutive photons of unpolarized one-light and compare with ordinary two-light.

    Off-manifold specs are refused unless ``force`` is set.
    """
    if not force and not on_manifold(spec, tolerance):
        raise ValueError("spec is not consistent with linearity (pass force=True to override)")
    ens, wed_fraction = wed_consecutive(spec, source)
    rho = ensemble_density(ens)
    ref = ensemble_density(two_light("PUP2"))
    diff = float(np.max(np.abs(rho - ref)))
    return FatLightCertificate(
        source=source,
        ensemble=ens,
        density=rho,
        reference_density=ref,
        max_difference=diff,
        ordinary=diff < 1e-12,
        stats=ensemble_stats(ens),
        wed_fraction=wed_fraction,
    )


def random_phase_family_spec(rng, ratio: float = 0.5) -> MarriageMillSpec:
    """A spec with independent random phases on the like and unlike amplitudes."""
    rng = np.random.default_rng(rng)
    a_s = np.exp(1j * rng.uniform(0, 2 * np.pi))
    a_o = np.sqrt(ratio) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return MarriageMillSpec.family(a_s, a_o)

