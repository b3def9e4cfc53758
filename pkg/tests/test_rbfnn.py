import math

import numpy as np
import pytest

from agewatch.rbfnn import (
    ForecastResult,
    ModelFormatError,
    RbfNetwork,
    TrainConfig,
    TrainingDivergedError,
    TrainReport,
    forecast_recursive,
    forward,
    gradient,
    init_network,
    load_model,
    mse,
    rbf_activation,
    save_model,
    train,
)
from agewatch.timeseries import TimeSeries, WindowedDataset, embed, min_max_scale


def make_dataset(inputs, targets, order_m=None, horizon_n=1):
    inputs = np.asarray(inputs, dtype=float)
    if order_m is None:
        order_m = inputs.shape[1] - 1
    return WindowedDataset(
        order_m=order_m, horizon_n=horizon_n, inputs=inputs, targets=np.asarray(targets, float)
    )


def random_network(rng, max_dim=5):
    d = int(rng.integers(1, max_dim + 1))
    m = int(rng.integers(1, max_dim + 1))
    j = int(rng.integers(1, max_dim + 1))
    return RbfNetwork(
        centers=rng.uniform(-1, 1, size=(m, d)),
        sigma=float(rng.uniform(0.5, 2.0)),
        weights=rng.uniform(-1, 1, size=(m, j)),
        input_dim=d,
        output_dim=j,
    )


def sample_loss(net, x, target):
    outputs, _ = forward(net, x)
    residual = np.asarray(target, float) - outputs
    return float(np.sum(residual * residual) / net.output_dim)


def finite_difference_gradient(net, x, target, step=1e-6):
    """Central differences of the per-sample loss over each weight."""
    grad = np.zeros_like(net.weights)
    for m in range(net.weights.shape[0]):
        for j in range(net.weights.shape[1]):
            original = net.weights[m, j]
            net.weights[m, j] = original + step
            upper = sample_loss(net, x, target)
            net.weights[m, j] = original - step
            lower = sample_loss(net, x, target)
            net.weights[m, j] = original
            grad[m, j] = (upper - lower) / (2 * step)
    return grad


class TestRbfActivation:
    def test_unity_at_center(self):
        assert rbf_activation([1.0, 2.0], [1.0, 2.0], 0.7) == 1.0

    def test_hand_value_unit_distance(self):
        assert rbf_activation([1.0, 0.0], [0.0, 0.0], 1.0) == pytest.approx(
            math.exp(-0.5), rel=1e-12
        )

    def test_hand_value_distance_two(self):
        assert rbf_activation([2.0], [0.0], 1.0) == pytest.approx(
            math.exp(-2.0), rel=1e-12
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rbf_activation([1.0, 2.0], [1.0], 1.0)

    def test_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            rbf_activation([1.0], [0.0], 0.0)

    def test_always_in_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            value = rbf_activation(
                rng.uniform(-3, 3, d), rng.uniform(-3, 3, d), float(rng.uniform(0.3, 3))
            )
            assert 0.0 < value <= 1.0


class TestInitNetwork:
    def test_exemplars_become_centers(self):
        ds = make_dataset([[0.0], [1.0], [2.0]], [1.0, 2.0, 3.0])
        net = init_network(ds, sigma=1.0, max_centers=10)
        assert net.num_centers == 3
        np.testing.assert_array_equal(net.centers, ds.inputs)

    def test_zero_weights_give_zero_output(self):
        ds = make_dataset([[0.0, 1.0], [1.0, 2.0]], [1.0, 2.0])
        net = init_network(ds, sigma=1.0)
        outputs, _ = forward(net, [0.5, 1.5])
        np.testing.assert_array_equal(outputs, [0.0])

    def test_mean_pairwise_sigma_single_pair(self):
        ds = make_dataset([[0.0], [2.0]], [0.0, 0.0])
        net = init_network(ds)
        assert net.sigma == 2.0

    def test_mean_pairwise_requires_two_centers(self):
        ds = make_dataset([[0.0]], [1.0])
        with pytest.raises(ValueError, match="explicit sigma"):
            init_network(ds)

    def test_duplicates_are_removed(self):
        ds = make_dataset([[0.0], [0.0], [1.0]], [1.0, 1.0, 2.0])
        net = init_network(ds, sigma=1.0)
        assert net.num_centers == 2

    def test_max_centers_caps_in_order(self):
        ds = make_dataset([[0.0], [1.0], [2.0], [3.0]], [0.0, 0.0, 0.0, 0.0])
        net = init_network(ds, sigma=1.0, max_centers=2)
        np.testing.assert_array_equal(net.centers, [[0.0], [1.0]])

    def test_mean_pairwise_floor(self):
        ds = make_dataset([[0.0], [1e-12]], [0.0, 0.0])
        net = init_network(ds)
        assert net.sigma == 1e-6


class TestForward:
    def test_zero_weights(self):
        net = RbfNetwork(
            centers=[[0.0], [1.0]], sigma=1.0, weights=np.zeros((2, 3)),
            input_dim=1, output_dim=3,
        )
        outputs, hidden = forward(net, [0.3])
        np.testing.assert_array_equal(outputs, [0.0, 0.0, 0.0])
        assert hidden.shape == (2,)

    def test_single_center_identity(self):
        net = RbfNetwork(
            centers=[[0.5]], sigma=1.0, weights=[[1.0]], input_dim=1, output_dim=1
        )
        outputs, hidden = forward(net, [0.5])
        assert outputs[0] == 1.0
        assert hidden[0] == 1.0

    def test_weighted_sum_hand_value(self):
        # place x so the second hidden activation is exactly exp(-ln 2) = 1/2
        distance = math.sqrt(2.0 * math.log(2.0))
        net = RbfNetwork(
            centers=[[0.0], [distance]], sigma=1.0, weights=[[2.0], [4.0]],
            input_dim=1, output_dim=1,
        )
        outputs, hidden = forward(net, [0.0])
        assert hidden[0] == 1.0
        assert hidden[1] == pytest.approx(0.5, rel=1e-12)
        assert outputs[0] == pytest.approx((2.0 * 1.0 + 4.0 * 0.5) / 2.0, rel=1e-12)

    def test_dimension_mismatch(self):
        net = RbfNetwork(
            centers=[[0.0, 0.0]], sigma=1.0, weights=[[1.0]], input_dim=2, output_dim=1
        )
        with pytest.raises(ValueError):
            forward(net, [1.0])

    def test_outputs_finite_and_hidden_in_unit_interval(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            net = random_network(rng)
            outputs, hidden = forward(net, rng.uniform(-2, 2, net.input_dim))
            assert np.all(hidden > 0.0) and np.all(hidden <= 1.0)
            assert np.isfinite(outputs).all()


class TestMse:
    def test_perfect_fit_is_zero(self):
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[1.0]], input_dim=1, output_dim=1
        )
        ds = make_dataset([[0.0]], [1.0])
        assert mse(net, ds) == 0.0

    def test_unit_error(self):
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[0.0]], input_dim=1, output_dim=1
        )
        ds = make_dataset([[0.0]], [1.0])
        assert mse(net, ds) == 1.0

    def test_mean_of_squared_errors(self):
        # zero weights, x at the center: Z = 0, so errors equal the targets
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[0.0]], input_dim=1, output_dim=1
        )
        ds = make_dataset([[0.0], [0.0]], [1.0, 2.0])
        assert mse(net, ds) == pytest.approx(2.5, rel=1e-15)


class TestGradient:
    def test_zero_at_stationary_point(self):
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[1.0]], input_dim=1, output_dim=1
        )
        np.testing.assert_array_equal(gradient(net, [0.0], [1.0]), [[0.0]])

    def test_hand_value(self):
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[0.0]], input_dim=1, output_dim=1
        )
        np.testing.assert_allclose(gradient(net, [0.0], [1.0]), [[-2.0]], rtol=1e-15)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            net = random_network(rng)
            x = rng.uniform(-1, 1, net.input_dim)
            target = rng.uniform(-1, 1, net.output_dim)
            analytic = gradient(net, x, target)
            numeric = finite_difference_gradient(net, x, target)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-9)

    def test_dimension_mismatch(self):
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[0.0]], input_dim=1, output_dim=1
        )
        with pytest.raises(ValueError):
            gradient(net, [0.0], [1.0, 2.0])


def toy_network():
    """Single center at the origin with x = 0: the hidden activation is 1."""
    return RbfNetwork(
        centers=[[0.0]], sigma=1.0, weights=[[0.0]], input_dim=1, output_dim=1
    )


class TestTrain:
    def test_zero_epochs_is_a_noop(self):
        net = toy_network()
        report = train(net, make_dataset([[0.0]], [1.0]),
                       TrainConfig(learning_rate=0.9, epochs=0))
        assert report.epochs_run == 0
        assert report.mse_history == ()
        assert not report.converged
        np.testing.assert_array_equal(net.weights, [[0.0]])

    @pytest.mark.parametrize("rate", [0.25, 0.5, 0.75])
    def test_toy_recurrence_matches_hand_iteration(self, rate):
        # with one unit activation the update is w <- w + 2*eta*(1 - w)
        ds = make_dataset([[0.0]], [1.0])
        net = toy_network()
        train(net, ds, TrainConfig(learning_rate=rate, epochs=100, mode="per-sample"))
        expected = 0.0
        for _ in range(100):
            expected = expected + 2 * rate * (1.0 - expected)
        assert net.weights[0, 0] == expected

    @pytest.mark.parametrize("rate", [0.25, 0.75])
    def test_toy_error_shrinks_monotonically(self, rate):
        ds = make_dataset([[0.0]], [1.0])
        net = toy_network()
        errors = [abs(net.weights[0, 0] - 1.0)]
        for _ in range(20):
            train(net, ds, TrainConfig(learning_rate=rate, epochs=1, mode="per-sample"))
            errors.append(abs(net.weights[0, 0] - 1.0))
        assert all(b < a for a, b in zip(errors, errors[1:]) if a != 0.0)

    def test_toy_converges_within_tolerance(self):
        ds = make_dataset([[0.0]], [1.0])
        net = toy_network()
        train(net, ds, TrainConfig(learning_rate=0.5, epochs=100, mode="per-sample"))
        assert abs(net.weights[0, 0] - 1.0) < 1e-3

    def test_batch_equals_per_sample_for_single_pair(self):
        ds = make_dataset([[0.3, 0.6]], [0.8])
        net_a = init_network(ds, sigma=0.9)
        net_b = init_network(ds, sigma=0.9)
        report_a = train(net_a, ds, TrainConfig(learning_rate=0.2, epochs=25, mode="batch"))
        report_b = train(net_b, ds, TrainConfig(learning_rate=0.2, epochs=25, mode="per-sample"))
        np.testing.assert_array_equal(net_a.weights, net_b.weights)
        assert report_a.mse_history == report_b.mse_history

    def test_training_is_deterministic(self):
        series = TimeSeries(
            name="t", start_time=0, interval=1,
            values=np.sin(np.linspace(0, 6, 40)) + 2.0,
        )
        scaled, _ = min_max_scale(series)
        ds = embed(scaled, 2, 1)
        results = []
        for _ in range(2):
            net = init_network(ds, sigma=0.4)
            report = train(net, ds, TrainConfig(learning_rate=0.5, epochs=40))
            results.append((net.weights.copy(), report))
        np.testing.assert_array_equal(results[0][0], results[1][0])
        assert results[0][1] == results[1][1]

    def test_single_batch_step_never_increases_mse(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            m = int(rng.integers(1, 6))
            q = int(rng.integers(1, 31))
            net = RbfNetwork(
                centers=rng.uniform(0, 1, size=(m, d)),
                sigma=float(rng.uniform(0.5, 2.0)),
                weights=rng.uniform(-1, 1, size=(m, 1)),
                input_dim=d,
                output_dim=1,
            )
            ds = make_dataset(rng.uniform(0, 1, size=(q, d)), rng.uniform(0, 1, size=q))
            before = mse(net, ds)
            train(net, ds, TrainConfig(learning_rate=1e-2, epochs=1, mode="batch"))
            after = mse(net, ds)
            assert after <= before + 1e-12

    def test_early_stop_on_target_mse(self):
        ds = make_dataset([[0.0]], [1.0])
        net = toy_network()
        report = train(
            net, ds, TrainConfig(learning_rate=0.5, epochs=50, target_mse=1e-9)
        )
        assert report.converged
        assert report.epochs_run < 50

    def test_divergence_aborts_with_epoch(self):
        ds = make_dataset([[0.0]], [1.0])
        net = toy_network()
        with pytest.raises(TrainingDivergedError, match="epoch"):
            train(net, ds, TrainConfig(learning_rate=50.0, epochs=500))

    def test_centers_and_sigma_stay_frozen(self):
        ds = make_dataset([[0.0], [1.0]], [0.5, 0.25])
        net = init_network(ds, sigma=0.8)
        centers_before = net.centers.copy()
        train(net, ds, TrainConfig(learning_rate=0.3, epochs=20))
        np.testing.assert_array_equal(net.centers, centers_before)
        assert net.sigma == 0.8

    def test_report_invariant(self):
        with pytest.raises(ValueError):
            TrainReport(epochs_run=2, mse_history=(1.0,), converged=False)

    def test_network_owns_its_weights(self):
        seed_weights = np.zeros((1, 1))
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=seed_weights, input_dim=1, output_dim=1
        )
        train(net, make_dataset([[0.0]], [1.0]),
              TrainConfig(learning_rate=0.5, epochs=1, mode="per-sample"))
        assert net.weights[0, 0] == 1.0
        assert seed_weights[0, 0] == 0.0  # caller's array untouched


class TestForecastRecursive:
    def test_single_step_equals_forward(self):
        ds = make_dataset([[0.1, 0.2], [0.2, 0.3]], [0.3, 0.4])
        net = init_network(ds, sigma=0.5)
        train(net, ds, TrainConfig(learning_rate=0.4, epochs=60))
        history = np.array([0.2, 0.3])
        result = forecast_recursive(net, history, 1)
        outputs, _ = forward(net, history)
        assert result.values[0] == outputs[0]
        assert result.horizon_steps == 1

    def test_constant_series_stays_constant(self):
        # the constant series collapses to one exemplar center whose hidden
        # activation is exactly 1, so the first per-sample step at rate 0.5
        # lands the weight on the constant and the recursion is a fixed point
        values = np.full(10, 0.5)
        series = TimeSeries(name="c", start_time=0, interval=1, values=values)
        ds = embed(series, 1, 1)
        net = init_network(ds, sigma=1.0)
        train(net, ds, TrainConfig(learning_rate=0.5, epochs=50, mode="per-sample"))
        result = forecast_recursive(net, [0.5, 0.5], 5)
        np.testing.assert_array_equal(result.values, np.full(5, 0.5))

    def test_matches_hand_unrolled_recursion(self):
        ramp = TimeSeries(
            name="r", start_time=0, interval=1,
            values=np.linspace(0.0, 1.0, 12),
        )
        ds = embed(ramp, 1, 1)
        net = init_network(ds, sigma=0.3)
        train(net, ds, TrainConfig(learning_rate=0.5, epochs=100))
        result = forecast_recursive(net, [ramp.values[-2], ramp.values[-1]], 5)
        window = [ramp.values[-2], ramp.values[-1]]
        for step in range(5):
            outputs, _ = forward(net, np.array(window))
            assert result.values[step] == outputs[0]
            window = [window[1], outputs[0]]

    def test_origin_index_default_and_override(self):
        net = toy_network()
        assert forecast_recursive(net, [0.0], 2).origin_index == 0
        assert forecast_recursive(net, [0.0], 2, origin_index=41).origin_index == 41

    def test_rejects_bad_steps(self):
        net = toy_network()
        with pytest.raises(ValueError):
            forecast_recursive(net, [0.0], 0)

    def test_rejects_wrong_history_length(self):
        net = toy_network()
        with pytest.raises(ValueError):
            forecast_recursive(net, [0.0, 1.0], 3)

    def test_result_invariant(self):
        with pytest.raises(ValueError):
            ForecastResult(values=np.ones(3), horizon_steps=2, origin_index=0)


class TestPersistence:
    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            net = random_network(rng)
            loaded = load_model(save_model(net))
            np.testing.assert_array_equal(loaded.centers, net.centers)
            np.testing.assert_array_equal(loaded.weights, net.weights)
            assert loaded.sigma == net.sigma
            assert loaded.input_dim == net.input_dim
            assert loaded.output_dim == net.output_dim

    def test_version_mismatch(self):
        with pytest.raises(ModelFormatError, match="version mismatch"):
            load_model("agewatch-rbf v2\ninput_dim 1\n")

    def test_weight_row_count_mismatch(self):
        net = RbfNetwork(
            centers=[[0.0], [1.0]], sigma=1.0, weights=[[1.0], [2.0]],
            input_dim=1, output_dim=1,
        )
        document = save_model(net)
        truncated = "\n".join(document.splitlines()[:-1]) + "\n"
        with pytest.raises(ModelFormatError, match="shape"):
            load_model(truncated)

    def test_corrupted_field(self):
        net = RbfNetwork(
            centers=[[0.0]], sigma=1.0, weights=[[1.0]], input_dim=1, output_dim=1
        )
        document = save_model(net).replace("sigma 1.0", "sigma banana")
        with pytest.raises(ModelFormatError, match="sigma"):
            load_model(document)

    def test_hand_written_minimal_document(self):
        document = (
            "agewatch-rbf v1\n"
            "input_dim 1\n"
            "output_dim 1\n"
            "sigma 1.0\n"
            "M 1\n"
            "0.0\n"
            "2.0\n"
        )
        net = load_model(document)
        outputs, hidden = forward(net, [1.0])
        assert hidden[0] == rbf_activation([1.0], [0.0], 1.0)
        assert outputs[0] == pytest.approx(2.0 * math.exp(-0.5), rel=1e-12)

    def test_nonpositive_sigma_rejected(self):
        document = (
            "agewatch-rbf v1\ninput_dim 1\noutput_dim 1\nsigma -1.0\nM 1\n0.0\n2.0\n"
        )
        with pytest.raises(ModelFormatError, match="inconsistent"):
            load_model(document)
