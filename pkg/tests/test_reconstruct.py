"""Reconstruction, the post-filter path, and the two end-to-end pipelines."""

import numpy as np
import pytest

from ghostsim import (
    BASIS_PROCESSED,
    POST_PROCESSED,
    DimensionError,
    GridSpec,
    NoiseModel,
    ProtocolConfig,
    basis_processed_image,
    build_operator_matrix,
    canonical_basis,
    cyclic_correlate,
    decompose_basis,
    derive_seed,
    flatten,
    hadamard_basis,
    hadamard_inverse_scale,
    identity_kernel,
    kernel_autocorrelation,
    modify_basis,
    noise_autocorrelation,
    post_process,
    post_processed_image,
    reconstruct,
    run_basis_protocol,
    unflatten,
)

QUIET = NoiseModel()


def relative_error(got, want):
    scale = max(np.abs(want).max(), 1e-30)
    return np.abs(np.asarray(got) - np.asarray(want)).max() / scale


class TestReconstruct:
    def test_canonical_is_reshape(self):
        basis = canonical_basis(GridSpec(2))
        image = reconstruct(np.array([1.0, 2.0, 3.0, 4.0]), basis)
        assert image.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_orthonormal_completeness(self, rng):
        grid = GridSpec(4)
        basis = canonical_basis(grid)
        obj = rng.normal(size=(4, 4))
        coeffs = np.array([float(np.sum(np.asarray(p) * obj)) for p in basis])
        assert np.array_equal(reconstruct(coeffs, basis), obj)

    def test_hadamard_completeness_factor(self, rng):
        # oracle: the explicit matrix product of the +/-1 rows with themselves
        grid = GridSpec(4)
        basis = hadamard_basis(grid)
        flat = basis.stack.reshape(len(basis), -1).astype(float)
        assert np.array_equal(flat @ flat.T, 16.0 * np.eye(16))
        obj = rng.normal(size=(4, 4))
        coeffs = flat @ obj.ravel()
        image = reconstruct(coeffs, basis)
        assert relative_error(image, 16.0 * obj) < 1e-12

    def test_count_mismatch(self):
        with pytest.raises(DimensionError):
            reconstruct(np.zeros(5), canonical_basis(GridSpec(2)))

    def test_records_must_cover_all_patterns(self, edge_kernel):
        grid = GridSpec(4)
        modified = modify_basis(canonical_basis(grid), edge_kernel)
        records = run_basis_protocol(np.full((4, 4), 0.5),
                                     decompose_basis(modified), QUIET,
                                     ProtocolConfig(1.0))
        with pytest.raises(DimensionError):
            reconstruct(records[:-1], canonical_basis(grid))
        with pytest.raises(DimensionError):
            reconstruct(records + [records[0]], canonical_basis(grid))


class TestPostProcess:
    def test_identity_kernel_is_noop(self, rng):
        image = rng.normal(size=(5, 5))
        assert np.array_equal(post_process(image, identity_kernel()), image)

    def test_zero_sum_kernel_kills_constant(self, edge_kernel):
        assert np.all(post_process(np.full((6, 6), 2.5), edge_kernel) == 0.0)

    def test_orientation_matches_operator_transpose(self, rng, edge_kernel):
        grid = GridSpec(5)
        image = rng.normal(size=(5, 5))
        op = build_operator_matrix(edge_kernel, grid)
        expected = unflatten(op.T @ flatten(image), grid)
        assert post_process(image, edge_kernel) == pytest.approx(expected, abs=1e-12)


class TestHadamardInverseScale:
    def test_divides_by_pixel_count(self):
        image = np.full((2, 2), 4.0)
        assert np.array_equal(hadamard_inverse_scale(image, GridSpec(2)),
                              np.ones((2, 2)))

    def test_applied_twice_divides_twice(self):
        grid = GridSpec(2)
        image = np.full((2, 2), 16.0)
        twice = hadamard_inverse_scale(hadamard_inverse_scale(image, grid), grid)
        assert np.array_equal(twice, np.ones((2, 2)))

    def test_composes_with_hadamard_reconstruction(self, rng):
        grid = GridSpec(4)
        basis = hadamard_basis(grid)
        obj = rng.normal(size=(4, 4))
        coeffs = basis.stack.reshape(16, -1).astype(float) @ obj.ravel()
        image = hadamard_inverse_scale(reconstruct(coeffs, basis), grid)
        assert relative_error(image, obj) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            hadamard_inverse_scale(np.zeros((3, 3)), GridSpec(2))


class TestPipelineEquality:
    """Noiseless basis-processed and post-processed images are the same image."""

    @pytest.mark.parametrize("side", [4, 8])
    def test_noiseless_equality_canonical(self, side, rng, edge_kernel):
        obj = rng.uniform(0.0, 1.0, size=(side, side))
        protocol = ProtocolConfig(1.0)
        post = post_processed_image(obj, edge_kernel, QUIET, protocol)
        basis = basis_processed_image(obj, edge_kernel, QUIET, protocol)
        assert relative_error(basis.image, post.image) < 1e-10
        # dense-operator oracle for the shared target
        grid = GridSpec(side)
        op = build_operator_matrix(edge_kernel, grid)
        oracle = unflatten(op.T @ flatten(obj), grid)
        assert relative_error(basis.image, oracle) < 1e-10
        assert relative_error(oracle, cyclic_correlate(obj, edge_kernel)) < 1e-12

    def test_noiseless_equality_hadamard(self, rng, edge_kernel):
        obj = rng.uniform(0.0, 1.0, size=(4, 4))
        protocol = ProtocolConfig(1.0)
        parent = hadamard_basis(GridSpec(4))
        post = post_processed_image(obj, edge_kernel, QUIET, protocol, parent)
        basis = basis_processed_image(obj, edge_kernel, QUIET, protocol, parent)
        oracle = cyclic_correlate(obj, edge_kernel)
        assert relative_error(post.image, oracle) < 1e-10
        assert relative_error(basis.image, oracle) < 1e-10

    def test_provenance_and_method_tags(self, edge_kernel):
        obj = np.full((4, 4), 0.5)
        protocol = ProtocolConfig(1.0)
        noise = NoiseModel(seed=17)
        post = post_processed_image(obj, edge_kernel, noise, protocol)
        basis = basis_processed_image(obj, edge_kernel, noise, protocol)
        assert post.method == POST_PROCESSED
        assert basis.method == BASIS_PROCESSED
        assert post.provenance == ("canonical", "edge-eq3", 17)
        assert basis.provenance == ("canonical", "edge-eq3", 17)


class TestNoiseCharacter:
    """Measuring through the modified basis leaves the noise white; filtering
    afterwards imprints the kernel's autocorrelation on it."""

    def run_pure_noise(self, method, side, trials, edge_kernel):
        grid = GridSpec(side)
        zero = np.zeros((side, side))
        protocol = ProtocolConfig(1.0)
        decomposed = decompose_basis(modify_basis(canonical_basis(grid), edge_kernel))
        acc = np.zeros((side, side))
        for i in range(trials):
            noise = NoiseModel(detector_sigma=1.0, seed=derive_seed(404, i))
            if method == BASIS_PROCESSED:
                image = basis_processed_image(zero, edge_kernel, noise, protocol,
                                              decomposed=decomposed).image
            else:
                image = post_processed_image(zero, edge_kernel, noise, protocol).image
            acc += noise_autocorrelation(image)
        return acc / trials

    def test_basis_noise_is_white(self, edge_kernel):
        corr = self.run_pure_noise(BASIS_PROCESSED, 32, 12, edge_kernel)
        off = corr.copy()
        off[0, 0] = 0.0
        assert np.abs(off).max() <= 0.05

    def test_post_noise_carries_kernel_autocorrelation(self, edge_kernel):
        corr = self.run_pure_noise(POST_PROCESSED, 32, 12, edge_kernel)
        expected = kernel_autocorrelation(edge_kernel)
        assert corr[1, 1] == pytest.approx(expected[(1, 1)], abs=0.05)
        assert corr[1, -1] == pytest.approx(expected[(1, -1)], abs=0.05)
        assert corr[0, 2] == pytest.approx(expected[(0, 2)], abs=0.05)
