"""Classifier pattern table, frozen scenario ranks, and oracle agreement.

Frozen rank profiles below were derived once from the shipped scenario
systems at their default seeds and are regression anchors: a change in
Hankel layout, tolerance policy, or window convention shows up here first.
"""
import numpy as np
import pytest

from becaus.classifier import PATTERN_TABLE, classify, partition
from becaus.datagen import generate, generate_identifiable
from becaus.exceptions import LengthTooShortError
from becaus.linalg import ToleranceConfig
from becaus.relations import Relation

from oracles import oracle_tests


EXPECTED_RANKS = {
    2: {"past": 5, "past_theta": 7, "past_psi": 6, "full": 7,
        "one_step": 6, "one_step_psi2": 6, "one_step_theta2": 7},
    3: {"past": 6, "past_theta": 8, "past_psi": 8, "full": 10,
        "one_step": 8, "one_step_psi2": 9, "one_step_theta2": 9},
    4: {"past": 4, "past_theta": 6, "past_psi": 6, "full": 8,
        "one_step": 6, "one_step_psi2": 7, "one_step_theta2": 7},
}


class TestPatternTable:
    def test_six_relations(self):
        assert PATTERN_TABLE[(False, False, False, False)] == Relation.INDEPENDENT
        assert PATTERN_TABLE[(True, False, True, False)] == Relation.THETA_TO_PSI
        assert PATTERN_TABLE[(False, True, False, True)] == Relation.PSI_TO_THETA
        assert PATTERN_TABLE[(False, False, True, False)] == Relation.THETA_AND_LATENT_TO_PSI
        assert PATTERN_TABLE[(False, False, False, True)] == Relation.PSI_AND_LATENT_TO_THETA
        assert PATTERN_TABLE[(False, False, True, True)] == Relation.LATENT_COMMON_CAUSE
        assert len(PATTERN_TABLE) == 6

    def test_unlisted_pattern_is_inconclusive(self, rng):
        # (True, True, ...) cannot arise from the six structures; feed the
        # classifier data engineered to fall outside the table instead of
        # asserting on internals: a single constant pair gives all-False
        # minus table membership is exercised via swapped().
        assert PATTERN_TABLE.get((True, True, False, False)) is None


class TestFrozenScenarioRanks:
    def test_scenario2(self, example2_system):
        ds = generate(Relation.THETA_TO_PSI, 50, np.random.default_rng(0),
                      sys=example2_system, x0=[1, 0], driver_dist=(0, 1))
        out = classify(ds.theta, ds.psi, ds.T_ini)
        assert out.ranks == EXPECTED_RANKS[2], out.ranks
        assert out.relation == Relation.THETA_TO_PSI
        assert out.pattern == (True, False, True, False)

    def test_scenario3(self, example3_system):
        ds = generate(Relation.THETA_AND_LATENT_TO_PSI, 50,
                      np.random.default_rng(1), sys=example3_system,
                      x0=[1, 0], latent_dim=1, latent_dist=(-10, 10))
        out = classify(ds.theta, ds.psi, ds.T_ini)
        assert out.ranks == EXPECTED_RANKS[3], out.ranks
        assert out.relation == Relation.THETA_AND_LATENT_TO_PSI

    def test_scenario4_grouped_outputs(self, example4_system):
        ds = generate(Relation.LATENT_COMMON_CAUSE, 50,
                      np.random.default_rng(2), sys=example4_system,
                      x0=[1, 0], output_split=2, latent_dist=(0, 1))
        out = classify(ds.theta, ds.psi, ds.T_ini)
        assert ds.T_ini == 2
        assert out.ranks == EXPECTED_RANKS[4], out.ranks
        assert out.relation == Relation.LATENT_COMMON_CAUSE

    def test_scenario1_streams(self):
        rng = np.random.default_rng(3)
        ds = generate(Relation.INDEPENDENT, 50, rng, T_ini=3,
                      driver_dist=(-1, 1), psi_dist=(-10, 10))
        out = classify(ds.theta, ds.psi, 3)
        assert out.relation == Relation.INDEPENDENT
        assert out.pattern == (False, False, False, False)


class TestInvariances:
    def test_scaling_both_series(self, example2_dataset):
        base = classify(example2_dataset.theta, example2_dataset.psi, 3)
        for c in (1e-3, 1e-1, 1e2, 1e3):
            out = classify(c * example2_dataset.theta, c * example2_dataset.psi, 3)
            assert out.relation == base.relation, f"relation changed at scale {c}"
            assert out.ranks == base.ranks, f"ranks changed at scale {c}"

    def test_swap_symmetry_on_random_draws(self, rng):
        for relation in map(Relation, range(1, 7)):
            m = 2 if relation in (Relation.PSI_AND_LATENT_TO_THETA,
                                  Relation.LATENT_COMMON_CAUSE) else 1
            p = 2 if relation in (Relation.THETA_AND_LATENT_TO_PSI,
                                  Relation.LATENT_COMMON_CAUSE) else 1
            for _ in range(5):
                ds = generate_identifiable(relation, 80, rng, order=2, m=m, p=p)
                fwd = classify(ds.theta, ds.psi, ds.T_ini)
                rev = classify(ds.psi, ds.theta, ds.T_ini)
                assert rev.relation == fwd.relation.swapped(), \
                    f"{relation.label}: {fwd.relation} vs swapped {rev.relation}"
                assert (rev.t1, rev.t2, rev.t3, rev.t4) == \
                       (fwd.t2, fwd.t1, fwd.t4, fwd.t3)

    def test_longer_past_window_still_classifies(self, example2_dataset):
        for T_ini in (4, 5, 6):
            out = classify(example2_dataset.theta, example2_dataset.psi, T_ini)
            assert out.relation == Relation.THETA_TO_PSI, \
                f"T_ini={T_ini} broke the verdict"


class TestOracleAgreement:
    def test_sampling_oracle_small_instances(self):
        """Package tests 1-4 vs the independent feasibility oracle."""
        rng = np.random.default_rng(99)
        checked = 0
        for trial in range(36):
            relation = Relation(trial % 6 + 1)
            m = 2 if relation in (Relation.PSI_AND_LATENT_TO_THETA,
                                  Relation.LATENT_COMMON_CAUSE) else 1
            p = 2 if relation in (Relation.THETA_AND_LATENT_TO_PSI,
                                  Relation.LATENT_COMMON_CAUSE) else 1
            n = int(rng.integers(1, 4))
            ds = generate(relation, 40, rng, stream_dims=(m, p)) \
                if relation == Relation.INDEPENDENT else _draw_system_dataset(
                    rng, relation, n, m, p)
            N = int(rng.integers(6, 13))
            T = N + ds.T_ini + 1
            theta, psi = ds.theta[:T], ds.psi[:T]
            out = classify(theta, psi, ds.T_ini)
            otests, cert3, cert4 = oracle_tests(theta, psi, ds.T_ini, rng)
            assert out.pattern == otests, \
                f"trial {trial} ({relation.label}): {out.pattern} vs oracle {otests}"
            assert cert3 is not False and cert4 is not False, \
                f"trial {trial}: infeasibility certificate failed"
            checked += 1
        assert checked == 36


def _draw_system_dataset(rng, relation, n, m, p):
    from becaus.lti import random_discoverable_system

    kv = int(rng.integers(1, 3))
    if relation in (Relation.THETA_TO_PSI, Relation.PSI_TO_THETA):
        dims = (m, p) if relation == Relation.THETA_TO_PSI else (p, m)
        sys = random_discoverable_system(relation, n, dims[0], dims[1], 0, rng)
        return generate(relation, 40, rng, sys=sys)
    if relation in (Relation.THETA_AND_LATENT_TO_PSI,
                    Relation.PSI_AND_LATENT_TO_THETA):
        dims = (m, p) if relation == Relation.THETA_AND_LATENT_TO_PSI else (p, m)
        sys = random_discoverable_system(relation, n, dims[0], dims[1], kv, rng)
        return generate(relation, 40, rng, sys=sys, latent_dim=kv)
    sys = random_discoverable_system(relation, n, m, p, kv, rng)
    return generate(relation, 40, rng, sys=sys, output_split=m)


class TestEdges:
    def test_too_short_series(self, example2_dataset):
        with pytest.raises(LengthTooShortError):
            classify(example2_dataset.theta[:4], example2_dataset.psi[:4], 3)

    def test_one_dim_arrays_accepted(self, example2_dataset):
        out = classify(example2_dataset.theta[:, 0], example2_dataset.psi[:, 0], 3)
        assert out.relation == Relation.THETA_TO_PSI

    def test_wider_future_window_reports_tests_only(self, example2_dataset):
        out = classify(example2_dataset.theta, example2_dataset.psi, 3, T_f=3)
        assert out.relation == Relation.INCONCLUSIVE
        assert out.T_f == 3

    def test_outcome_dict_round_trips_to_json(self, example2_dataset):
        import json

        out = classify(example2_dataset.theta, example2_dataset.psi, 3)
        blob = json.dumps(out.to_dict())
        assert json.loads(blob)["relation"] == 2

    def test_custom_tolerance_threads_through(self, example2_dataset):
        out = classify(example2_dataset.theta, example2_dataset.psi, 3,
                       tol=ToleranceConfig(rank_rtol=1e-7))
        assert out.rank_rtol == 1e-7
        assert out.relation == Relation.THETA_TO_PSI
