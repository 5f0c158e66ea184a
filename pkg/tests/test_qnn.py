from __future__ import annotations

import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.utils.validation import check_is_fitted

from qsc.circuits import AnsatzSpec, bind, build_ansatz, run
from qsc.dataset import GenerationConfig, generate, prepare_state, prepare_states
from qsc.qnn import (PrepStateEncoder, QNNClassifier, TrainConfig, TrainedModel, binary_expectation,
                     cross_entropy, dataset_loss, forward, interpret_matrix, observable_matrix,
                     outcome_probabilities, predict, predict_dataset, train)


@pytest.fixture(scope="module")
def small2q():
    return generate(GenerationConfig(2, "AD", 12, seed=5))


@pytest.fixture(scope="module")
def small3q():
    return generate(GenerationConfig(3, "AD", 10, seed=5))


def test_interpret_matrix_mod_rule():
    m = interpret_matrix(8, 5)
    assert [int(np.argmax(row)) for row in m] == [0, 1, 2, 3, 4, 0, 1, 2]
    with pytest.raises(ValueError):
        interpret_matrix(4, 5)


def test_outcome_probabilities_mod_and_observable():
    psi = np.array([0.6, 0.0, 0.8j, 0.0])
    np.testing.assert_allclose(outcome_probabilities(psi, 2), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(outcome_probabilities(psi, 2, "observable"), [0.36, 0.64], atol=1e-15)
    with pytest.raises(ValueError):
        outcome_probabilities(psi, 3, "observable")


def test_forward_and_binary_expectation_agree(small2q, rng):
    spec = AnsatzSpec("real_amplitudes", 2, 3)
    bound = bind(build_ansatz(spec), rng.uniform(-np.pi, np.pi, spec.num_params))
    for s in small2q.samples[:5]:
        p = forward(s, bound, 2, "observable")
        assert p[1] == pytest.approx(binary_expectation(s, bound), abs=1e-14)
        assert p.sum() == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        binary_expectation(small2q.samples[0], bound, np.eye(4))


def test_observable_expectation_by_matrix(small2q, rng):
    spec = AnsatzSpec("efficient_su2", 2, 1)
    bound = bind(build_ansatz(spec), rng.uniform(-np.pi, np.pi, spec.num_params))
    s = small2q.samples[-1]
    out = run(bound, prepare_state(s))
    direct = float(np.real(out.conj() @ observable_matrix(2) @ out))
    assert binary_expectation(s, bound) == pytest.approx(direct, abs=1e-14)


def test_cross_entropy_values_and_clipping():
    assert cross_entropy([0.25, 0.75], 1) == pytest.approx(-math.log(0.75), abs=1e-15)
    assert cross_entropy([1.0, 0.0], 1) == pytest.approx(27.631021115928547, abs=1e-12)
    with pytest.raises(ValueError):
        cross_entropy([0.5, 0.6], 0)
    with pytest.raises(ValueError):
        cross_entropy([0.5, 0.5], 2)


def test_dataset_loss_equals_hand_sum(small3q, rng):
    spec = AnsatzSpec("proposed", 3, 2)
    theta = rng.uniform(-np.pi, np.pi, spec.num_params)
    bound = bind(build_ansatz(spec), theta)
    samples = small3q.subset(small3q.train)
    hand = sum(cross_entropy(forward(s, bound, 5), s.label) for s in samples) / len(samples)
    assert dataset_loss(theta, samples, spec) == pytest.approx(hand, rel=1e-13)
    with pytest.raises(ValueError):
        dataset_loss(theta, [], spec)


def test_train_maxiter_zero_returns_start(small2q):
    spec = AnsatzSpec("real_amplitudes", 2, 3)
    model = train(small2q, spec, TrainConfig(maxiter=0), seed=4)
    theta0 = np.random.default_rng(4).uniform(-np.pi, np.pi, spec.num_params)
    np.testing.assert_array_equal(model.theta, theta0)
    assert model.loss_trace == [dataset_loss(theta0, small2q.subset(small2q.train), spec)]


def test_train_is_deterministic_and_trace_monotone(small2q):
    spec = AnsatzSpec("efficient_su2", 2, 2)
    a = train(small2q, spec, TrainConfig(maxiter=40), seed=1)
    b = train(small2q, spec, TrainConfig(maxiter=40), seed=1)
    assert a.to_json() == b.to_json()
    assert len(a.loss_trace) == 41
    assert all(y <= x for x, y in zip(a.loss_trace, a.loss_trace[1:]))
    assert a.loss_trace[-1] == pytest.approx(
        dataset_loss(a.theta, small2q.subset(small2q.train), spec), abs=1e-12)


def test_trained_model_round_trip(small2q):
    model = train(small2q, AnsatzSpec("real_amplitudes", 2, 1), TrainConfig(maxiter=5), seed=0)
    back = TrainedModel.from_json(model.to_json())
    assert back.to_json() == model.to_json()
    np.testing.assert_array_equal(back.theta, model.theta)
    assert model.loss_csv().splitlines()[0] == "iteration,loss"


def test_predict_matches_batch(small3q):
    model = train(small3q, AnsatzSpec("real_amplitudes", 3, 1), TrainConfig(maxiter=5), seed=0)
    batch = predict_dataset(model, small3q.samples)
    assert [predict(model, s)[0] for s in small3q.samples] == batch.tolist()


def test_finite_difference_gradient_consistency(small2q, rng):
    """Central differences at two step sizes agree: the loss is smooth."""
    spec = AnsatzSpec("real_amplitudes", 2, 3)
    samples = small2q.subset(small2q.train)
    theta = rng.uniform(-np.pi, np.pi, spec.num_params)
    e = np.zeros(spec.num_params)
    e[2] = 1.0

    def d(h):
        return (dataset_loss(theta + h * e, samples, spec) - dataset_loss(theta - h * e, samples, spec)) / (2 * h)

    assert d(1e-4) == pytest.approx(d(1e-5), rel=1e-4, abs=1e-8)


def test_train_rejects_mismatched_spec(small2q):
    with pytest.raises(ValueError):
        train(small2q, AnsatzSpec("real_amplitudes", 3, 1))
    with pytest.raises(ValueError):
        TrainConfig(readout="bogus")


# -- estimator API -----------------------------------------------------------

def test_estimator_params_and_clone():
    clf = QNNClassifier(ansatz="efficient_su2", maxiter=7)
    params = clf.get_params()
    assert params["ansatz"] == "efficient_su2" and params["maxiter"] == 7
    c2 = clone(clf).set_params(reps=2)
    assert c2.reps == 2 and clf.reps == 3


def test_estimator_fit_predict(small2q):
    X = prepare_states(small2q.samples)
    y = np.array(["sep", "ent"])[small2q.labels]
    clf = QNNClassifier(maxiter=30, random_state=2).fit(X, y)
    check_is_fitted(clf)
    assert set(clf.predict(X)) <= {"sep", "ent"}
    proba = clf.predict_proba(X)
    assert proba.shape == (X.shape[0], 2)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
    assert 0.0 <= clf.score(X, y) <= 1.0
    assert len(clf.loss_curve_) == 31


def test_estimator_pipeline_on_samples(small2q):
    pipe = make_pipeline(PrepStateEncoder(), QNNClassifier(maxiter=10))
    pipe.fit(small2q.samples, small2q.labels)
    assert pipe.predict(small2q.samples[:3]).shape == (3,)


def test_estimator_input_validation():
    clf = QNNClassifier(maxiter=1)
    with pytest.raises(ValueError):
        clf.fit(np.ones((3, 4)), [0, 1, 0])  # not normalized
    with pytest.raises(ValueError):
        clf.fit(np.eye(3, dtype=complex), [0, 1, 0])  # not a power of two
    with pytest.raises(ValueError):
        clf.fit(np.eye(4, dtype=complex), [0, 1])
    with pytest.raises(Exception):
        QNNClassifier().predict(np.eye(4, dtype=complex))


# -- worked examples ---------------------------------------------------------

def test_forward_examples():
    from qsc.dataset import DataSample
    from qsc.labels import topology
    sep = DataSample(topology("SEP", 2), "AD", "U0", (0.0, 0.0), 0, (0.0, 0.0), 0)
    ident = bind(build_ansatz(AnsatzSpec("real_amplitudes", 2, 1)), np.zeros(4))
    # RY(0) layers and CX on |00> leave |00>: p0 = 1
    np.testing.assert_allclose(forward(sep, ident, 2), [1.0, 0.0], atol=1e-15)
    assert binary_expectation(sep, ident) == 0.0
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(outcome_probabilities(bell, 2), [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(outcome_probabilities(bell, 2, "observable")[1], 0.5, atol=1e-15)
    ones = np.zeros(8)
    ones[7] = 1.0
    assert outcome_probabilities(ones, 2, "observable")[1] == 1.0


def test_cross_entropy_examples():
    assert cross_entropy([0.0, 1.0], 1) == 0.0
    assert cross_entropy([0.5, 0.5], 1) == pytest.approx(math.log(2), abs=1e-15)
    assert cross_entropy([1.0 - 1e-15, 1e-15], 1) == pytest.approx(-math.log(1e-12), abs=1e-12)


def test_single_sample_loss_is_cross_entropy(small2q, rng):
    spec = AnsatzSpec("real_amplitudes", 2, 3)
    theta = rng.uniform(-np.pi, np.pi, spec.num_params)
    s = small2q.samples[13]
    p = forward(s, bind(build_ansatz(spec), theta), 2)
    assert dataset_loss(theta, [s], spec) == pytest.approx(cross_entropy(p, s.label), abs=1e-14)


def test_predict_tie_goes_to_lower_class(small2q):
    # RY(pi/2) on qubit 0 of |00> yields p = (1/2, 1/2) under mod-2 binning
    from qsc.dataset import DataSample
    from qsc.labels import topology
    model = TrainedModel(AnsatzSpec("real_amplitudes", 2, 1), np.zeros(4), [0.0], 2)
    s = DataSample(topology("SEP", 2), "AD", "U0", (np.pi / 2, 0.0), 0, (0.0, 0.0), 0)
    label, p = predict(model, s)
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-15)
    assert label == 0


def test_trained_three_qubit_model_recognizes_held_out_genuine_states():
    ds = generate(GenerationConfig(3, "AD", 150, seed=0))
    model = train(ds, AnsatzSpec("proposed", 3, 3), TrainConfig(), seed=0)
    genuine = [s for s in ds.subset(ds.test) if s.label == 4]
    hits = np.mean(predict_dataset(model, genuine) == 4)
    assert hits > 0.5
