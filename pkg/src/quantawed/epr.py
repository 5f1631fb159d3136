"""Alice/Bob EPR experiment with pluggable strategies for Bob.

Alice measures her photon of each ``(|HH> - |VV>)/sqrt2`` pair in the plane or
circular basis, which collapses Bob's photon. Bob then processes his stream
with one strategy and histograms the outcomes. Running once per Alice basis
and comparing the two histograms measures how much Bob learns about Alice's
choice.

Strategies:

``direct``
    single-photon analyzer (plane basis by default).
``clone``
    optimal cloner, then the H/V beamsplitter on the biphoton.
``wed-perfect`` / ``wed-constrained`` / ``wed``
    marriage mill on consecutive photons (1-2, 3-4, ...), then the H/V
    beamsplitter on wed biphotons; unwed pairs are counted separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import UNWED, MarriageMillSpec, clone_branches, mill_apply
from .measurement import CHANNELS, draw_two_stage, hv_split_probs, povm_probs
from .qmath import inner
from .states import PhotonState, Polarization, basis_labels, basis_state, epr_state

STRATEGIES = ("direct", "clone", "wed-perfect", "wed-constrained", "wed")
RECORD_SCHEMA_VERSION = 1
ARMS = ("plane", "circular")


def conditional_state(alice: Polarization) -> tuple[float, PhotonState]:
    """Probability of Alice's outcome and Bob's normalized conditional photon."""
    psi = epr_state().reshape(2, 2)
    bob = np.conj(basis_state(alice).amplitudes) @ psi
    p = float(np.vdot(bob, bob).real)
    return p, PhotonState(bob / np.sqrt(p)).canonical()


def alice_collapse(basis: str, rng) -> tuple[Polarization, PhotonState]:
    """One Alice measurement; returns her outcome and Bob's collapsed photon."""
    rng = np.random.default_rng(rng)
    labels = basis_labels(basis)
    cond = [conditional_state(x) for x in labels]
    p = np.array([c[0] for c in cond])
    k = rng.choice(2, p=p / p.sum())
    return labels[k], cond[k][1]


def alice_collapse_many(basis: str, n: int, rng) -> tuple[np.ndarray, list[PhotonState]]:
    """``n`` Alice outcomes as indices into ``basis_labels(basis)``, plus the two Bob states."""
    rng = np.random.default_rng(rng)
    cond = [conditional_state(x) for x in basis_labels(basis)]
    p = np.array([c[0] for c in cond])
    idx = rng.choice(2, size=n, p=p / p.sum())
    return idx, [c[1] for c in cond]


def _bob_label(state: PhotonState) -> Polarization:
    for x in Polarization:
        if state.same_ray(basis_state(x)):
            return x
    raise ValueError(f"{state} is not a basis polarization")


@dataclass(frozen=True)
class ProtocolConfig:
    n_pairs: int
    strategy: str
    seed: int = 0
    bob_basis: str = "plane"
    mill: MarriageMillSpec | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be positive")
        if self.strategy.startswith("wed") and self.n_pairs < 2:
            raise ValueError("wedding strategies need at least two pairs")
        if self.strategy == "wed" and self.mill is None:
            raise ValueError("strategy 'wed' needs a mill spec")
        basis_labels(self.bob_basis)

    def mill_spec(self) -> MarriageMillSpec | None:
        if self.strategy == "wed-perfect":
            return MarriageMillSpec.perfect()
        if self.strategy == "wed-constrained":
            return MarriageMillSpec.canonical()
        return self.mill

    def to_dict(self) -> dict:
        mill = self.mill_spec()
        return {
            "n_pairs": self.n_pairs,
            "strategy": self.strategy,
            "seed": self.seed,
            "bob_basis": self.bob_basis,
            "mill": None if mill is None else mill.to_record(),
        }


def outcome_classes(cfg: ProtocolConfig) -> tuple[str, ...]:
    if cfg.strategy == "direct":
        return tuple(x.value for x in basis_labels(cfg.bob_basis))
    return CHANNELS


# Each strategy acts on a key (one Bob photon, or a consecutive pair) and is
# described by its branch table: branch weights and, per branch, the
# distribution over outcome classes plus one trailing "unwed" column.


def _branch_table(cfg: ProtocolConfig, photons: list[PhotonState]) -> tuple[np.ndarray, np.ndarray]:
    if cfg.strategy == "direct":
        labels = basis_labels(cfg.bob_basis)
        probs = [abs(inner(basis_state(x).amplitudes, photons[0].amplitudes)) ** 2 for x in labels]
        return np.ones(1), np.array([probs + [0.0]])
    if cfg.strategy == "clone":
        weights, rows = [], []
        for lam, b in clone_branches(photons[0]):
            weights.append(lam)
            rows.append(list(hv_split_probs(b).as_array()) + [0.0])
        return np.array(weights), np.array(rows)
    first, second = (_bob_label(p) for p in photons)
    weights, rows = [], []
    for p, result in mill_apply(cfg.mill_spec(), first, second).branches:
        weights.append(p)
        if result is UNWED:
            rows.append([0.0, 0.0, 0.0, 1.0])
        else:
            rows.append(list(hv_split_probs(result).as_array()) + [0.0])
    return np.array(weights), np.array(rows)


def analytic_distribution(cfg: ProtocolConfig, alice_basis: str) -> tuple[np.ndarray, float]:
    """Exact Bob outcome distribution for one Alice basis and the unwed fraction.

    The distribution is over :func:`outcome_classes`, post-selected on wed
    events for wedding strategies.
    """
    labels = basis_labels(alice_basis)
    cond = [conditional_state(x) for x in labels]
    acc = None
    if cfg.strategy.startswith("wed"):
        keys = [((cond[i][0] * cond[j][0]), [cond[i][1], cond[j][1]]) for i in range(2) for j in range(2)]
    else:
        keys = [(c[0], [c[1]]) for c in cond]
    for pk, photons in keys:
        w, table = _branch_table(cfg, photons)
        row = pk * (w @ table)
        acc = row if acc is None else acc + row
    unwed = float(acc[-1])
    dist = acc[:-1]
    return dist / dist.sum(), unwed


def _run_arm(cfg: ProtocolConfig, alice_basis: str, n_pairs: int, rng):
    """Simulate one Alice basis; returns Alice labels, class counts and unwed count."""
    idx, bob_states = alice_collapse_many(alice_basis, n_pairs, rng)
    alice_labels = "".join(basis_labels(alice_basis)[i].value for i in idx)
    k = len(outcome_classes(cfg))
    counts = np.zeros(k + 1, dtype=np.int64)
    if cfg.strategy.startswith("wed"):
        n_keys = n_pairs // 2
        keys = 2 * idx[: 2 * n_keys: 2] + idx[1: 2 * n_keys: 2]
        key_photons = {2 * i + j: [bob_states[i], bob_states[j]] for i in range(2) for j in range(2)}
    else:
        keys = idx
        key_photons = {i: [bob_states[i]] for i in range(2)}
    for key, photons in key_photons.items():
        sel = int(np.count_nonzero(keys == key))
        if sel == 0:
            continue
        w, table = _branch_table(cfg, photons)
        cols = draw_two_stage(w, table, sel, rng)
        counts += np.bincount(cols, minlength=k + 1)
    return alice_labels, counts[:k], int(counts[k])


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


def null_band(counts_a, counts_b, n_sigma: float = 3.0) -> float:
    """Upper edge of the tv distance expected when both histograms share one distribution.

    Each channel difference is bounded by ``n_sigma`` binomial standard
    deviations of the pooled estimate.
    """
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    na, nb = a.sum(), b.sum()
    pooled = (a + b) / (na + nb)
    sig = np.sqrt(pooled * (1 - pooled) * (1 / na + 1 / nb))
    return 0.5 * n_sigma * float(sig.sum())


def tv_sigma(p, q, n_a: int, n_b: int) -> float:
    """Standard deviation of the plug-in tv distance when ``p`` and ``q`` differ in every channel."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    s = np.sign(p - q)
    var = (np.dot(s ** 2, p) - np.dot(s, p) ** 2) / n_a + (np.dot(s ** 2, q) - np.dot(s, q) ** 2) / n_b
    return 0.5 * math.sqrt(var)


def mutual_information(joint) -> float:
    """Plug-in mutual information in bits of a 2-d contingency table of counts."""
    t = np.asarray(joint, dtype=float)
    if t.ndim != 2 or np.any(t < 0) or t.sum() <= 0:
        raise ValueError("joint table must be a non-negative 2-d array with positive total")
    p = t / t.sum()
    rows = p.sum(axis=1, keepdims=True)
    cols = p.sum(axis=0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / (rows @ cols)[nz])))


@dataclass
class ProtocolRecord:
    config: ProtocolConfig
    classes: tuple[str, ...]
    alice_outcomes: dict[str, str]
    bob_outcome_histogram: dict[str, list[int]]
    unwed: dict[str, int]
    tv_distance: float
    null_band: float
    control_tv: float
    mutual_information_bits: float
    analytic: dict = field(default_factory=dict)

    @property
    def signaling(self) -> bool:
        return self.tv_distance > self.null_band

    def verdict(self) -> str:
        return "signaling" if self.signaling else "no signaling"

    def unwed_fraction(self, arm: str) -> float:
        n_keys = self.config.n_pairs // 2
        return self.unwed[arm] / n_keys if n_keys else 0.0

    def to_dict(self, include_sequences: bool = False) -> dict:
        d = {
            "schema_version": RECORD_SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "classes": list(self.classes),
            "alice_outcome_counts": {
                arm: {x.value: seq.count(x.value) for x in basis_labels(arm)}
                for arm, seq in self.alice_outcomes.items()
            },
            "bob_outcome_histogram": {k: list(v) for k, v in self.bob_outcome_histogram.items()},
            "unwed": dict(self.unwed),
            "tv_distance": self.tv_distance,
            "null_band": self.null_band,
            "control_tv": self.control_tv,
            "mutual_information_bits": self.mutual_information_bits,
            "verdict": self.verdict(),
            "analytic": self.analytic,
        }
        if include_sequences:
            d["alice_outcomes"] = dict(self.alice_outcomes)
        return d


def run_protocol(cfg: ProtocolConfig) -> ProtocolRecord:
    """Run both Alice bases plus a same-basis control and compare Bob's histograms.

    Each arm gets its own child seed of ``cfg.seed``. The control run splits a
    plane-basis arm into halves and reports their tv distance as an empirical
    null reference.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(3)
    alice, hist, unwed = {}, {}, {}
    for arm, ss in zip(ARMS, children[:2]):
        a, c, u = _run_arm(cfg, arm, cfg.n_pairs, np.random.default_rng(ss))
        alice[arm], hist[arm], unwed[arm] = a, c, u

    rng_ctl = np.random.default_rng(children[2])
    half = max(cfg.n_pairs // 2, 2)
    _, c1, _ = _run_arm(cfg, "plane", half, rng_ctl)
    _, c2, _ = _run_arm(cfg, "plane", half, rng_ctl)
    control = tv_distance(c1, c2) if c1.sum() and c2.sum() else 0.0

    tv = tv_distance(hist["plane"], hist["circular"])
    band = null_band(hist["plane"], hist["circular"])
    mi = mutual_information(np.vstack([hist["plane"], hist["circular"]]))

    p, u_p = analytic_distribution(cfg, "plane")
    q, u_q = analytic_distribution(cfg, "circular")
    n_a, n_b = int(hist["plane"].sum()), int(hist["circular"].sum())
    analytic = {
        "plane": [float(x) for x in p],
        "circular": [float(x) for x in q],
        "unwed_fraction": {"plane": u_p, "circular": u_q},
        "tv_distance": tv_distance(p, q),
        "tv_sigma": tv_sigma(p, q, n_a, n_b) if tv_distance(p, q) > 1e-12 else None,
        "mutual_information_bits": mutual_information(np.vstack([p, q])),
    }
    return ProtocolRecord(
        config=cfg,
        classes=outcome_classes(cfg),
        alice_outcomes=alice,
        bob_outcome_histogram={k: [int(x) for x in v] for k, v in hist.items()},
        unwed=unwed,
        tv_distance=tv,
        null_band=band,
        control_tv=control,
        mutual_information_bits=mi,
        analytic=analytic,
    )


def strategy_wedding(mill: MarriageMillSpec, stream, rng) -> list:
    """Wed consecutive photons of ``stream`` (1-2, 3-4, ...) and measure each wed pair.

    ``stream`` holds :class:`PhotonState` objects in basis polarizations. Each
    event is one of ``"HH"``, ``"VV"``, ``"HV"`` or ``"unwed"``; a trailing odd
    photon is dropped.
    """
    stream = list(stream)
    if len(stream) < 2:
        raise ValueError("wedding needs at least two photons")
    rng = np.random.default_rng(rng)
    events = []
    for a, b in zip(stream[0::2], stream[1::2]):
        out = mill_apply(mill, _bob_label(a), _bob_label(b))
        p = np.array([br[0] for br in out.branches])
        result = out.branches[rng.choice(len(p), p=p / p.sum())][1]
        if result is UNWED:
            events.append("unwed")
            continue
        probs = hv_split_probs(result).as_array()
        events.append(CHANNELS[rng.choice(3, p=probs / probs.sum())])
    return events


def bob_analytic_probs(channel, povm, alice_basis: str) -> np.ndarray:
    """Outcome probabilities when Bob applies ``channel`` then ``povm`` to his photon."""
    probs = 0.0
    for x in basis_labels(alice_basis):
        p, s = conditional_state(x)
        probs = probs + p * povm_probs(channel.apply(s.density()), povm)
    return np.asarray(probs)
