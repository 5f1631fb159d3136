import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import mi_equal_priors
from quantawed.channels import MarriageMillSpec, random_channel
from quantawed.epr import (
    ProtocolConfig,
    alice_collapse,
    alice_collapse_many,
    analytic_distribution,
    bob_analytic_probs,
    conditional_state,
    mutual_information,
    null_band,
    run_protocol,
    strategy_wedding,
    tv_distance,
    tv_sigma,
)
from quantawed.measurement import random_povm
from quantawed.states import Polarization, basis_state

# Bob's HH/VV/HV rows after the perfect mill, per Alice basis
FAT_PLANE = [0.25, 0.25, 0.5]
FAT_CIRC = [0.375, 0.375, 0.25]
# frozen from mi_equal_priors(FAT_PLANE, FAT_CIRC)
FAT_MI = 0.04879494069539847


class TestCollapse:
    @pytest.mark.parametrize("alice", list(Polarization))
    def test_bob_matches_alice(self, alice):
        p, bob = conditional_state(alice)
        assert abs(p - 0.5) < 1e-15
        assert bob.same_ray(basis_state(alice))

    def test_single(self):
        label, bob = alice_collapse("circular", 1)
        assert label in (Polarization.R, Polarization.L)
        assert bob.same_ray(basis_state(label))

    def test_many_balanced(self):
        n = 100_000
        idx, _ = alice_collapse_many("plane", n, 2)
        assert abs(idx.mean() - 0.5) < 3 * np.sqrt(0.25 / n)


class TestStrategyWedding:
    def test_plane_stream_perfect(self):
        h, v = basis_state("H"), basis_state("V")
        ev = strategy_wedding(MarriageMillSpec.perfect(), [h, h, v, v, h, v, h], 0)
        assert ev == ["HH", "VV", "HV"]

    def test_canonical_unwed_rate(self):
        h, v = basis_state("H"), basis_state("V")
        ev = strategy_wedding(MarriageMillSpec.canonical(), [h, v] * 20_000, 3)
        frac = ev.count("unwed") / len(ev)
        assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / len(ev))
        assert set(ev) == {"HV", "unwed"}

    def test_circular_pair_frequencies(self):
        r = basis_state("R")
        ev = strategy_wedding(MarriageMillSpec.canonical(), [r, r] * 20_000, 4)
        n = len(ev)
        for ch, p in zip(("HH", "VV", "HV"), (0.25, 0.25, 0.5)):
            assert abs(ev.count(ch) / n - p) < 4 * np.sqrt(p * (1 - p) / n)

    def test_too_short(self):
        with pytest.raises(ValueError):
            strategy_wedding(MarriageMillSpec.canonical(), [basis_state("H")], 0)


class TestStatistics:
    def test_mi_identical_rows(self):
        assert mutual_information([[10, 20, 30], [10, 20, 30]]) == pytest.approx(0, abs=1e-15)

    def test_mi_identity(self):
        assert abs(mutual_information(np.eye(2)) - 1) < 1e-15

    def test_mi_fat_rows(self):
        assert abs(mi_equal_priors(FAT_PLANE, FAT_CIRC) - FAT_MI) < 1e-15
        assert abs(mutual_information(np.vstack([FAT_PLANE, FAT_CIRC])) - FAT_MI) < 1e-14

    def test_mi_rejects_negative(self):
        with pytest.raises(ValueError):
            mutual_information([[1, -1]])

    def test_tv(self):
        assert abs(tv_distance(FAT_PLANE, FAT_CIRC) - 0.25) < 1e-15
        assert tv_distance([3, 1], [6, 2]) == 0

    def test_tv_sigma_frozen(self):
        assert abs(tv_sigma(FAT_PLANE, FAT_CIRC, 50_000, 50_000) - 0.0029580398915498084) < 1e-15

    def test_null_band_shrinks(self):
        a = null_band([100, 100, 200], [100, 100, 200])
        b = null_band([10_000, 10_000, 20_000], [10_000, 10_000, 20_000])
        assert abs(a / b - 10) < 1e-9


class TestAnalytic:
    @pytest.mark.parametrize("strategy", ["direct", "clone", "wed-constrained"])
    def test_no_signaling_strategies(self, strategy):
        cfg = ProtocolConfig(10, strategy)
        p, _ = analytic_distribution(cfg, "plane")
        q, _ = analytic_distribution(cfg, "circular")
        assert np.max(np.abs(p - q)) < 1e-12

    def test_wed_perfect_rows(self):
        cfg = ProtocolConfig(10, "wed-perfect")
        assert_allclose(analytic_distribution(cfg, "plane")[0], FAT_PLANE, atol=1e-12)
        assert_allclose(analytic_distribution(cfg, "circular")[0], FAT_CIRC, atol=1e-12)

    def test_unwed_basis_independent(self):
        cfg = ProtocolConfig(10, "wed-constrained")
        assert abs(analytic_distribution(cfg, "plane")[1] - 0.25) < 1e-12
        assert abs(analytic_distribution(cfg, "circular")[1] - 0.25) < 1e-12

    def test_direct_circular_analyzer(self):
        cfg = ProtocolConfig(10, "direct", bob_basis="circular")
        assert_allclose(analytic_distribution(cfg, "plane")[0], [0.5, 0.5], atol=1e-12)


def test_no_signaling_random_channels():
    rng = np.random.default_rng(41)
    for _ in range(100):
        d_out = int(rng.integers(2, 5))
        ch = random_channel(2, d_out, int(rng.integers(1, 5)), rng)
        povm = random_povm(d_out, int(rng.integers(2, 5)), rng)
        p = bob_analytic_probs(ch, povm, "plane")
        q = bob_analytic_probs(ch, povm, "circular")
        assert abs(p.sum() - 1) < 1e-12
        assert np.max(np.abs(p - q)) < 1e-12


class TestConfig:
    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            ProtocolConfig(10, "teleport")

    def test_wed_needs_spec(self):
        with pytest.raises(ValueError):
            ProtocolConfig(10, "wed")

    def test_wed_needs_pairs(self):
        with pytest.raises(ValueError):
            ProtocolConfig(1, "wed-perfect")


class TestRun:
    def test_deterministic(self):
        a = run_protocol(ProtocolConfig(2000, "wed-perfect", seed=5))
        b = run_protocol(ProtocolConfig(2000, "wed-perfect", seed=5))
        assert a.to_dict(True) == b.to_dict(True)
        c = run_protocol(ProtocolConfig(2000, "wed-perfect", seed=6))
        assert a.alice_outcomes != c.alice_outcomes

    def test_arms_use_separate_streams(self):
        rec = run_protocol(ProtocolConfig(500, "direct", seed=7))
        plane = rec.alice_outcomes["plane"].replace("H", "0").replace("V", "1")
        circ = rec.alice_outcomes["circular"].replace("R", "0").replace("L", "1")
        assert plane != circ

    def test_counts_add_up(self):
        rec = run_protocol(ProtocolConfig(1001, "wed-constrained", seed=8))
        for arm in ("plane", "circular"):
            assert sum(rec.bob_outcome_histogram[arm]) + rec.unwed[arm] == 500
            assert len(rec.alice_outcomes[arm]) == 1001

    def test_record_json(self):
        rec = run_protocol(ProtocolConfig(200, "clone", seed=9))
        d = json.loads(json.dumps(rec.to_dict()))
        assert d["config"]["strategy"] == "clone"
        assert d["verdict"] in ("signaling", "no signaling")
        assert "alice_outcomes" not in d

    def test_custom_mill(self):
        rec = run_protocol(ProtocolConfig(2000, "wed", seed=10, mill=MarriageMillSpec.canonical()))
        assert rec.analytic["tv_sigma"] is None
