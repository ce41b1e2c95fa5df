import math

import numpy as np
import pytest

from nsgp.errors import InvalidParameterError
from nsgp.geometry import (
    MixtureComponents,
    evaluate_param_field,
    kernel_matrix,
    mixture_weights,
    neighborhood_counts,
    neighborhood_indices,
    param_fields,
    scaled_distance,
    spectral_params,
)


def random_components(rng, n_comp=3, with_smoothness=False):
    locs = rng.uniform(0, 5, size=(n_comp, 2))
    kernels = np.stack(
        [
            kernel_matrix(
                rng.uniform(0.2, 2.0),
                rng.uniform(0.2, 2.0),
                rng.uniform(0, math.pi / 2),
            )
            for _ in range(n_comp)
        ]
    )
    return MixtureComponents(
        locations=locs,
        kernels=kernels,
        variances=rng.uniform(0.5, 2.0, n_comp),
        nuggets=rng.uniform(0.0, 0.3, n_comp),
        weight_scale=rng.uniform(0.5, 3.0),
        smoothnesses=rng.uniform(0.5, 3.0, n_comp) if with_smoothness else None,
    )


class TestKernelMatrix:
    def test_zero_angle_is_diagonal(self):
        np.testing.assert_allclose(kernel_matrix(2.0, 3.0, 0.0), np.diag([2.0, 3.0]))

    def test_equal_eigenvalues_ignore_angle(self):
        for angle in (0.0, 0.3, 1.2, math.pi / 2):
            np.testing.assert_allclose(
                kernel_matrix(1.7, 1.7, angle), 1.7 * np.eye(2), atol=1e-15
            )

    def test_quarter_turn_oracle(self):
        # direct 2x2 product R diag(2,1) R^T at angle pi/4
        expected = np.array([[1.5, 0.5], [0.5, 1.5]])
        np.testing.assert_allclose(
            kernel_matrix(2.0, 1.0, math.pi / 4), expected, atol=1e-15
        )

    def test_eigenvalues_and_symmetry(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            e1, e2 = rng.uniform(0.05, 5, 2)
            angle = rng.uniform(0, math.pi / 2)
            k = kernel_matrix(e1, e2, angle)
            assert k[0, 1] == k[1, 0]
            eigs = np.sort(np.linalg.eigvalsh(k))
            np.testing.assert_allclose(eigs, np.sort([e1, e2]), atol=1e-12)

    def test_spectral_roundtrip(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            e1, e2 = rng.uniform(0.05, 5, 2)
            angle = rng.uniform(1e-4, math.pi / 2 - 1e-4)
            k = kernel_matrix(e1, e2, angle)
            r1, r2, a = spectral_params(k)
            np.testing.assert_allclose(
                kernel_matrix(r1, r2, a), k, rtol=1e-10, atol=1e-12
            )
            assert 0.0 <= a <= math.pi / 2

    @pytest.mark.parametrize(
        "args",
        [(0.0, 1.0, 0.1), (1.0, -2.0, 0.1), (1.0, 1.0, -0.2), (1.0, 1.0, 2.0),
         (math.nan, 1.0, 0.0)],
    )
    def test_invalid_parameters(self, args):
        with pytest.raises(InvalidParameterError):
            kernel_matrix(*args)


class TestScaledDistance:
    def test_zero_separation(self):
        k = kernel_matrix(1.3, 0.4, 0.2)
        assert scaled_distance([1.0, 2.0], [1.0, 2.0], k, k) == 0.0

    def test_identity_kernels_give_squared_euclidean(self):
        eye = np.eye(2)
        assert scaled_distance([3.0, 4.0], [0.0, 0.0], eye, eye) == pytest.approx(25.0)

    def test_diagonal_oracle(self):
        # averaged kernel diag(2, 3); offset (1, 1) gives 1/2 + 1/3
        q = scaled_distance([1, 1], [0, 0], np.diag([1.0, 4.0]), np.diag([3.0, 2.0]))
        assert q == pytest.approx(5.0 / 6.0, abs=1e-14)

    def test_argument_swap_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a = kernel_matrix(*rng.uniform(0.2, 2, 2), rng.uniform(0, math.pi / 2))
            b = kernel_matrix(*rng.uniform(0.2, 2, 2), rng.uniform(0, math.pi / 2))
            s1, s2 = rng.uniform(-3, 3, (2, 2))
            q12 = scaled_distance(s1, s2, a, b)
            q21 = scaled_distance(s2, s1, b, a)
            assert q12 == pytest.approx(q21, rel=1e-12)


class TestMixtureWeights:
    def test_single_component(self):
        w = mixture_weights([0.3, 0.4], [[2.0, 2.0]], 1.0)
        np.testing.assert_allclose(w, [1.0])

    def test_equidistant_pair(self):
        w = mixture_weights([0.0, 0.0], [[1.0, 0.0], [-1.0, 0.0]], 0.7)
        np.testing.assert_allclose(w, [0.5, 0.5])

    def test_exponential_oracle(self):
        # second anchor at distance sqrt(2 * scale): relative weight exp(-1)
        scale = 2.0
        d = math.sqrt(2.0 * scale)
        w = mixture_weights([0.0, 0.0], [[0.0, 0.0], [d, 0.0]], scale)
        np.testing.assert_allclose(
            w, [1 / (1 + math.exp(-1)), math.exp(-1) / (1 + math.exp(-1))], rtol=1e-12
        )

    def test_sum_to_one_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            pts = rng.uniform(-10, 10, size=(20, 2))
            comps = rng.uniform(-10, 10, size=(rng.integers(1, 8), 2))
            w = mixture_weights(pts, comps, rng.uniform(0.1, 5))
            np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(w > 0) and np.all(w <= 1.0)

    def test_far_from_all_components_is_stable(self):
        w = mixture_weights([1e6, 1e6], [[0.0, 0.0], [1.0, 0.0]], 0.5)
        assert np.all(np.isfinite(w))
        assert w.sum() == pytest.approx(1.0, abs=1e-12)


class TestParamFields:
    def test_identical_components_reduce_exactly(self):
        k = kernel_matrix(1.2, 0.7, 0.5)
        mc = MixtureComponents(
            locations=[[0, 0], [1, 3], [4, 1]],
            kernels=np.stack([k, k, k]),
            variances=[1.5, 1.5, 1.5],
            nuggets=[0.2, 0.2, 0.2],
            weight_scale=1.0,
        )
        kern, var, nug, smooth = evaluate_param_field([2.2, 0.9], mc)
        np.testing.assert_allclose(kern, k, atol=1e-15)
        assert var == pytest.approx(1.5, abs=1e-12)
        assert nug == pytest.approx(0.2, abs=1e-12)
        assert smooth is None

    def test_equal_weight_midpoint(self):
        mc = MixtureComponents(
            locations=[[-1, 0], [1, 0]],
            kernels=np.stack([np.eye(2), np.eye(2)]),
            variances=[1.0, 3.0],
            nuggets=[0.0, 0.0],
            weight_scale=1.0,
        )
        _, var, _, _ = evaluate_param_field([0.0, 5.0], mc)
        assert var == pytest.approx(2.0, abs=1e-12)

    def test_weighted_kernel_oracle(self):
        scale = 2.0
        d = math.sqrt(2.0 * scale)
        mc = MixtureComponents(
            locations=[[0.0, 0.0], [d, 0.0]],
            kernels=np.stack([np.eye(2), 4.0 * np.eye(2)]),
            variances=[1.0, 1.0],
            nuggets=[0.0, 0.0],
            weight_scale=scale,
        )
        w1 = 1 / (1 + math.exp(-1))
        kern, _, _, _ = evaluate_param_field([0.0, 0.0], mc)
        np.testing.assert_allclose(
            kern, (w1 + 4 * (1 - w1)) * np.eye(2), rtol=1e-4
        )

    def test_continuity_lipschitz(self):
        # weights are differentiable; nearby points give O(step) field changes
        rng = np.random.default_rng(5)
        mc = random_components(rng, n_comp=4)
        span = np.array(
            [np.abs(mc.variances).max(), np.abs(mc.nuggets).max(),
             np.abs(mc.kernels).max()]
        ).max()
        step = 1e-4
        for _ in range(50):
            s = rng.uniform(-1, 6, 2)
            delta = rng.normal(size=2)
            delta *= step / np.linalg.norm(delta)
            f0 = param_fields(s.reshape(1, 2), mc)
            f1 = param_fields((s + delta).reshape(1, 2), mc)
            dmax = max(np.linalg.norm(s - b) for b in mc.locations) + step
            k = mc.n_components
            bound = step * (2.0 * dmax / mc.weight_scale) * k * span * 4.0
            assert abs(f1.variances[0] - f0.variances[0]) <= bound
            assert abs(f1.nuggets[0] - f0.nuggets[0]) <= bound
            assert np.abs(f1.kernels[0] - f0.kernels[0]).max() <= bound

    def test_component_validation(self):
        with pytest.raises(InvalidParameterError):
            MixtureComponents(
                locations=[[0, 0]],
                kernels=np.stack([np.diag([1.0, -1.0])]),
                variances=[1.0],
                nuggets=[0.0],
                weight_scale=1.0,
            )
        with pytest.raises(InvalidParameterError):
            MixtureComponents(
                locations=[[0, 0], [1, 1]],
                kernels=np.stack([np.eye(2), np.eye(2)]),
                variances=[1.0],
                nuggets=[0.0, 0.0],
                weight_scale=1.0,
            )


class TestNeighborhoods:
    def test_empty_coords(self):
        counts = neighborhood_counts(np.empty((0, 2)), [[0, 0], [1, 1]], 1.0)
        np.testing.assert_array_equal(counts, [0, 0])

    def test_boundary_inclusive(self):
        counts = neighborhood_counts([[1.0, 0.0]], [[0.0, 0.0]], 1.0)
        np.testing.assert_array_equal(counts, [1])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(19)
        coords = rng.uniform(0, 4, size=(100, 2))
        anchors = rng.uniform(0, 4, size=(4, 2))
        counts = neighborhood_counts(coords, anchors, 1.0)
        brute = [
            sum(
                1
                for s in coords
                if math.hypot(s[0] - b[0], s[1] - b[1]) <= 1.0
            )
            for b in anchors
        ]
        np.testing.assert_array_equal(counts, brute)

    def test_indices_match_counts(self):
        rng = np.random.default_rng(23)
        coords = rng.uniform(0, 4, size=(60, 2))
        anchor = np.array([2.0, 2.0])
        idx = neighborhood_indices(coords, anchor, 1.5)
        assert len(idx) == neighborhood_counts(coords, [anchor], 1.5)[0]
        d = np.linalg.norm(coords[idx] - anchor, axis=1)
        assert np.all(d <= 1.5)
