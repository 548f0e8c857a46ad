"""Risk scoring, candidate similarity, prototypes, and virtual-edge sampling."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodebalance import Split, augment
from nodebalance.augmentation import (
    AugmentedGraph,
    calibrate_risk,
    class_prototypes,
    compute_uncertainty,
    link_probabilities,
    prediction_similarity,
    sample_virtual_edges,
    topology_similarity,
)
from nodebalance.gcn import PredictionState

from conftest import build_graph, random_graph


def _random_state(n, m, seed):
    probs = np.random.default_rng(seed).dirichlet(np.ones(m), size=n)
    return PredictionState.from_probs(probs)


class TestUncertainty:
    def test_equals_one_minus_max(self):
        state = _random_state(1000, 5, seed=0)
        u = compute_uncertainty(state)
        assert np.max(np.abs(u - (1.0 - state.probs.max(axis=1)))) < 1e-12

    def test_bounds(self):
        state = _random_state(500, 3, seed=1)
        u = compute_uncertainty(state)
        assert (u >= 0).all() and (u <= 1.0 - 1.0 / 3 + 1e-12).all()

    def test_confident_prediction_scores_zero(self):
        state = PredictionState.from_probs(np.array([[1.0, 0.0], [0.5, 0.5]]))
        u = compute_uncertainty(state)
        assert u[0] == 0.0
        assert abs(u[1] - 0.5) < 1e-15


class TestRiskCalibration:
    def test_pinned_hand_case(self):
        """Two nodes in one predicted group, u=[0.6, 0.2], count 2 vs max 20."""
        u = np.array([0.6, 0.2])
        preds = np.array([1, 1])
        scores = calibrate_risk(u, preds, train_counts=np.array([20, 2]))
        assert scores.class_mean[1] == pytest.approx(0.4)
        assert scores.class_scale.tolist() == [1.0, 10.0]
        assert np.allclose(scores.calibrated, [0.02, -0.02])
        assert np.allclose(scores.risk, [0.02, 0.0])

    def test_scale_strictly_antimonotone_in_counts(self):
        counts = np.array([40, 25, 10, 5, 1])
        scores = calibrate_risk(np.zeros(5), np.arange(5), counts)
        assert (np.diff(scores.class_scale) > 0).all()
        assert scores.class_scale[0] == 1.0

    def test_risk_is_positive_part(self):
        state = _random_state(200, 4, seed=3)
        u = compute_uncertainty(state)
        scores = calibrate_risk(u, state.preds, np.array([10, 10, 5, 2]))
        assert np.array_equal(scores.risk, np.maximum(scores.calibrated, 0.0))
        assert (scores.risk >= 0).all()

    def test_every_nonempty_group_has_a_zero_risk_node(self):
        state = _random_state(300, 4, seed=4)
        u = compute_uncertainty(state)
        scores = calibrate_risk(u, state.preds, np.array([10, 10, 5, 2]))
        for j in range(4):
            members = state.preds == j
            if members.any():
                assert (scores.risk[members] == 0.0).any()

    def test_empty_group_mean_is_zero(self):
        u = np.array([0.1, 0.2])
        scores = calibrate_risk(u, np.array([0, 0]), np.array([5, 5, 5]))
        assert scores.class_mean[1] == 0.0 and scores.class_mean[2] == 0.0

    def test_counts_below_one_rejected(self):
        with pytest.raises(ValueError, match="at least one training node"):
            calibrate_risk(np.zeros(2), np.zeros(2, dtype=int), np.array([5, 0]))

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_permuting_nodes_permutes_risk(self, seed):
        state = _random_state(40, 3, seed=seed)
        u = compute_uncertainty(state)
        counts = np.array([9, 5, 2])
        base = calibrate_risk(u, state.preds, counts).risk
        perm = np.random.default_rng(seed + 1).permutation(40)
        permuted = calibrate_risk(u[perm], state.preds[perm], counts).risk
        assert np.allclose(permuted, base[perm])


class TestPredictionSimilarity:
    def test_rows_sum_to_one_and_zero_at_prediction(self):
        state = _random_state(200, 5, seed=5)
        sim = prediction_similarity(state)
        rows = np.arange(200)
        assert np.max(np.abs(sim.scores.sum(axis=1) - 1.0)) < 1e-9
        assert (sim.scores[rows, state.preds] == 0.0).all()
        assert (sim.scores >= 0).all()

    def test_proportional_to_off_prediction_mass(self):
        probs = np.array([[0.6, 0.3, 0.1]])
        sim = prediction_similarity(PredictionState.from_probs(probs))
        assert np.allclose(sim.scores, [[0.0, 0.75, 0.25]])

    def test_one_hot_row_is_degenerate_zero(self):
        probs = np.array([[1.0, 0.0], [0.7, 0.3]])
        sim = prediction_similarity(PredictionState.from_probs(probs))
        assert sim.scores[0].tolist() == [0.0, 0.0]
        assert np.allclose(sim.scores[1], [0.0, 1.0])


class TestTopologySimilarity:
    def test_neighbor_vote_hand_case(self):
        # star around node 0; neighbor predictions 1, 1, 2, 0
        g = build_graph([[0, 1], [0, 2], [0, 3], [0, 4]], [0, 1, 1, 2, 0])
        probs = np.full((5, 3), 1.0 / 3)
        probs[np.arange(5), [0, 1, 1, 2, 0]] = 0.5
        probs /= probs.sum(axis=1, keepdims=True)
        state = PredictionState.from_probs(probs)
        sim = topology_similarity(g, state)
        # node 0: three neighbors not predicted class 0, votes 2x class1, 1x class2
        assert np.allclose(sim.scores[0], [0.0, 2 / 3, 1 / 3])

    def test_rows_sum_to_one_or_degenerate(self):
        rng = np.random.default_rng(6)
        g = random_graph(60, 0.1, 3, rng)
        state = _random_state(60, 3, seed=7)
        sim = topology_similarity(g, state)
        sums = sim.scores.sum(axis=1)
        degenerate = sums == 0.0
        assert np.max(np.abs(sums[~degenerate] - 1.0)) < 1e-9
        assert (sim.scores[np.arange(60), state.preds] == 0.0).all()

    def test_homogeneous_neighborhood_falls_back_to_prediction(self):
        # node 0's single neighbor is predicted node 0's own class
        g = build_graph([[0, 1], [1, 2]], [0, 0, 1])
        probs = np.array([[0.6, 0.4], [0.8, 0.2], [0.3, 0.7]])
        state = PredictionState.from_probs(probs)
        sim = topology_similarity(g, state)
        assert np.allclose(sim.scores[0], prediction_similarity(state).scores[0])
        assert np.allclose(sim.scores[0], [0.0, 1.0])
        # node 1 has one off-class neighbor, so it keeps the vote route
        assert np.allclose(sim.scores[1], [0.0, 1.0])
        assert np.allclose(sim.scores[2], [1.0, 0.0])

    def test_isolated_node_falls_back_to_prediction(self):
        g = build_graph([[0, 1]], [0, 1, 0])
        probs = np.array([[0.9, 0.1], [0.2, 0.8], [0.45, 0.55]])
        state = PredictionState.from_probs(probs)
        sim = topology_similarity(g, state)
        assert np.allclose(sim.scores[2], prediction_similarity(state).scores[2])


class TestPrototypes:
    def test_mean_of_predicted_group(self):
        x = np.array([[1.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
        preds = np.array([0, 0, 1])
        y = np.array([0, 1, 1])
        train = np.array([0, 1, 2])
        protos = class_prototypes(x, preds, y, train, m=2)
        assert np.allclose(protos[0], [2.0, 0.0])
        assert np.allclose(protos[1], [0.0, 4.0])

    def test_empty_group_uses_training_nodes_of_that_class(self):
        x = np.array([[1.0], [2.0], [5.0], [7.0]])
        preds = np.array([0, 0, 0, 0])  # nobody predicted class 1
        y = np.array([0, 0, 1, 1])
        train = np.array([0, 2, 3])
        protos = class_prototypes(x, preds, y, train, m=2)
        assert protos[1, 0] == pytest.approx(6.0)


class TestLinkProbabilities:
    def test_row_sums_equal_risk(self):
        state = _random_state(300, 4, seed=8)
        u = compute_uncertainty(state)
        scores = calibrate_risk(u, state.preds, np.array([12, 8, 4, 2]))
        sim = prediction_similarity(state)
        probs = link_probabilities(scores.risk, sim)
        assert np.max(np.abs(probs.sum(axis=1) - scores.risk)) < 1e-9
        assert (probs >= 0).all() and (probs <= 1).all()

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_row_sum_identity_property(self, seed):
        state = _random_state(30, 3, seed=seed)
        u = compute_uncertainty(state)
        scores = calibrate_risk(u, state.preds, np.array([7, 3, 2]))
        probs = link_probabilities(scores.risk, prediction_similarity(state))
        assert np.max(np.abs(probs.sum(axis=1) - scores.risk)) < 1e-9


class TestEdgeSampling:
    def test_bernoulli_frequencies_within_three_sigma(self):
        draws = 10_000
        probs = np.tile(np.array([0.1, 0.3, 0.7]), (draws, 1))
        edges = sample_virtual_edges(probs, np.random.default_rng(123))
        for j, p in enumerate((0.1, 0.3, 0.7)):
            count = int((edges[:, 1] == j).sum())
            sigma = np.sqrt(draws * p * (1 - p))
            assert abs(count - draws * p) < 3 * sigma, f"p={p}: {count}"

    def test_extremes_are_deterministic(self):
        probs = np.array([[0.0, 1.0], [1.0, 0.0]])
        edges = sample_virtual_edges(probs, np.random.default_rng(0))
        assert sorted(map(tuple, edges.tolist())) == [(0, 1), (1, 0)]

    def test_same_stream_state_reproduces_sample(self):
        probs = np.random.default_rng(1).random((50, 4)) * 0.5
        e1 = sample_virtual_edges(probs, np.random.default_rng(9))
        e2 = sample_virtual_edges(probs, np.random.default_rng(9))
        assert np.array_equal(e1, e2)

    def test_successive_samples_differ(self):
        probs = np.full((200, 3), 0.5)
        rng = np.random.default_rng(2)
        e1 = sample_virtual_edges(probs, rng)
        e2 = sample_virtual_edges(probs, rng)
        assert not np.array_equal(e1, e2)


class TestAugmentComposition:
    def _setup(self, seed=0):
        rng = np.random.default_rng(seed)
        g = random_graph(50, 0.12, 3, rng)
        train = np.concatenate([np.nonzero(g.y == j)[0][:4] for j in range(3)])
        rest = np.setdiff1d(np.arange(50), train)
        split = Split.from_indices(train, rest[:10], rest[10:], g.y, 3)
        state = _random_state(50, 3, seed=seed + 1)
        return g, split, state

    def test_structure(self):
        g, split, state = self._setup()
        out = augment(g, state, split, "topology", np.random.default_rng(0))
        assert isinstance(out, AugmentedGraph)
        assert out.virtual_x.shape == (3, g.d)
        assert out.virtual_labels.tolist() == [0, 1, 2]
        assert out.link_probs.shape == (50, 3)
        pairs = out.edge_pairs()
        if pairs.size:
            assert (pairs[:, 0] < g.n).all()
            assert (pairs[:, 1] >= g.n).all() and (pairs[:, 1] < g.n + 3).all()
        assert out.num_virtual_edges == out.virtual_edges.shape[0]
        assert out.num_high_risk == int((out.risk.risk > 0).sum())

    def test_deterministic_given_generator_state(self):
        g, split, state = self._setup()
        o1 = augment(g, state, split, "prediction", np.random.default_rng(5))
        o2 = augment(g, state, split, "prediction", np.random.default_rng(5))
        assert np.array_equal(o1.virtual_edges, o2.virtual_edges)
        assert np.array_equal(o1.link_probs, o2.link_probs)

    def test_bad_mode_rejected(self):
        g, split, state = self._setup()
        with pytest.raises(ValueError, match="mode"):
            augment(g, state, split, "pred", np.random.default_rng(0))

    def test_state_shape_mismatch_rejected(self):
        g, split, _ = self._setup()
        bad = _random_state(49, 3, seed=0)
        with pytest.raises(ValueError, match="does not match"):
            augment(g, bad, split, "topology", np.random.default_rng(0))

    def test_graph_is_not_mutated(self):
        g, split, state = self._setup()
        edges_before = g.edges.copy()
        x_before = g.x.copy()
        augment(g, state, split, "topology", np.random.default_rng(3))
        assert np.array_equal(g.edges, edges_before)
        assert np.array_equal(g.x, x_before)
