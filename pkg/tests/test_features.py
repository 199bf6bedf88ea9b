import numpy as np
import pytest

from conftest import make_image, make_pair
from oracles import lbp_code_naive, lbp_histogram_naive, pca_eigenvalues_dense
from pupguard.errors import EmbeddingError
from pupguard.features import (
    gradient_field,
    hog_descriptor,
    hog_length,
    lbp_code,
    lbp_histogram,
    load_embeddings,
    pair_features,
    pca_fit,
    pca_inverse_transform,
    pca_transform,
)


class TestLbpCode:
    def test_all_equal_gives_full_code(self):
        assert lbp_code(np.full((3, 3), 7, dtype=np.uint8)) == 255

    def test_all_neighbors_below_center(self):
        patch = np.full((3, 3), 50, dtype=np.uint8)
        patch[1, 1] = 100
        assert lbp_code(patch) == 0

    def test_right_neighbor_is_most_significant_bit(self):
        patch = np.zeros((3, 3), dtype=np.uint8)
        patch[1, 1] = 10
        patch[1, 2] = 20  # right neighbor only
        assert lbp_code(patch) == 0b10000000 == 128

    def test_matches_naive_on_random_patches(self, rng):
        for _ in range(200):
            patch = rng.integers(0, 256, (3, 3), dtype=np.uint8)
            assert lbp_code(patch) == lbp_code_naive(patch)


class TestLbpHistogram:
    def test_constant_image_all_mass_at_255(self):
        hist = lbp_histogram(make_image(np.full((5, 5), 9)))
        assert hist[255] == 1.0
        assert hist.sum() == pytest.approx(1.0, abs=1e-12)

    def test_normalized(self, rng):
        hist = lbp_histogram(rng.integers(0, 256, (12, 12), dtype=np.uint8))
        assert hist.sum() == pytest.approx(1.0, abs=1e-12)
        assert hist.shape == (256,)

    def test_4x4_matches_per_pixel_oracle(self, rng):
        img = rng.integers(0, 256, (4, 4), dtype=np.uint8)
        assert np.array_equal(lbp_histogram(img), lbp_histogram_naive(img))

    def test_100_random_images_match_oracle(self, rng):
        for _ in range(100):
            img = rng.integers(0, 256, (8, 8), dtype=np.uint8)
            np.testing.assert_array_almost_equal(
                lbp_histogram(img), lbp_histogram_naive(img), decimal=15
            )

    def test_grid_variant_shape_and_mass(self, rng):
        img = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        hist = lbp_histogram(img, grid=2)
        assert hist.shape == (4 * 256,)
        for r in range(4):
            assert hist[r * 256 : (r + 1) * 256].sum() == pytest.approx(1.0)

    def test_too_small_image(self):
        with pytest.raises(ValueError):
            lbp_histogram(make_image(np.zeros((2, 5))))

    def test_deterministic(self, rng):
        img = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        a = lbp_histogram(img)
        b = lbp_histogram(img.copy())
        assert np.array_equal(a, b)


class TestHog:
    def test_canonical_length(self):
        img = np.zeros((160, 160), dtype=np.uint8)
        desc = hog_descriptor(img)
        assert desc.shape[0] == hog_length(160) == 12996

    def test_constant_image_zero_descriptor(self):
        desc = hog_descriptor(np.full((32, 32), 77, dtype=np.uint8))
        assert np.all(desc == 0.0)

    def test_block_norm_bound(self, rng):
        img = rng.integers(0, 256, (160, 160), dtype=np.uint8)
        desc = hog_descriptor(img)
        blocks = desc.reshape(-1, 36)
        norms = np.linalg.norm(blocks, axis=1)
        assert np.all(norms <= 1.0 + 1e-6)

    def test_magnitude_is_hypotenuse(self, rng):
        img = rng.integers(0, 256, (16, 16), dtype=np.uint8)
        grad = gradient_field(img)
        assert np.allclose(
            grad.magnitude, np.sqrt(grad.gx**2 + grad.gy**2), atol=0
        )
        assert np.all((grad.orientation >= 0.0) & (grad.orientation < 180.0))

    def test_three_four_five_vote(self):
        # a pixel with gx=3, gy=4 contributes exactly G=5 across its two bins
        from pupguard import kernels

        mag = np.array([[5.0]])
        theta = np.array([[np.degrees(np.arctan2(4.0, 3.0))]])
        hist = kernels.hog_cell_histograms(mag, theta, 1, 9)
        assert hist.sum() == pytest.approx(5.0, rel=1e-12)

    def test_energy_conservation_before_normalization(self, rng):
        from pupguard import kernels

        img = rng.integers(0, 256, (64, 64), dtype=np.uint8)
        grad = gradient_field(img)
        hist = kernels.hog_cell_histograms(grad.magnitude, grad.orientation, 8, 9)
        assert hist.sum() == pytest.approx(grad.magnitude.sum(), rel=1e-6)

    def test_non_divisible_dims_rejected(self):
        with pytest.raises(ValueError):
            hog_descriptor(np.zeros((33, 33), dtype=np.uint8))

    def test_deterministic(self, rng):
        img = rng.integers(0, 256, (32, 32), dtype=np.uint8)
        assert np.array_equal(hog_descriptor(img), hog_descriptor(img.copy()))


class TestEmbeddings:
    def test_empty_table(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=16\n")
        table = load_embeddings(str(path))
        assert table.dim == 16 and len(table.vectors) == 0

    def test_two_rows(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=4\nimg_a,1,2,3,4\nimg_b,0.5,-1,2e-3,0\n")
        table = load_embeddings(str(path))
        assert len(table.vectors) == 2
        assert np.array_equal(table.lookup("img_a"), [1, 2, 3, 4])

    def test_ragged_row_reports_line(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=4\nok,1,2,3,4\nshort,1,2,3\n")
        with pytest.raises(EmbeddingError) as err:
            load_embeddings(str(path))
        assert err.value.line == 3

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=2\na,1,2\na,3,4\n")
        with pytest.raises(EmbeddingError, match="duplicate"):
            load_embeddings(str(path))

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=2\na,1,x\n")
        with pytest.raises(EmbeddingError, match="non-numeric"):
            load_embeddings(str(path))

    def test_missing_header(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a,1,2\n")
        with pytest.raises(EmbeddingError):
            load_embeddings(str(path))

    def test_missing_id_lookup(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=2\na,1,2\n")
        table = load_embeddings(str(path))
        with pytest.raises(EmbeddingError, match="nope"):
            table.lookup("nope")


class TestPca:
    def test_line_in_2d(self):
        t = np.linspace(-3, 3, 11)
        X = np.stack([t, 2 * t], axis=1)
        model = pca_fit(X, 1)
        direction = np.array([1.0, 2.0]) / np.sqrt(5.0)
        assert np.allclose(np.abs(model.components[0] @ direction), 1.0, atol=1e-12)
        along = X @ direction
        assert model.explained_variance[0] == pytest.approx(
            along.var(ddof=1), rel=1e-12
        )

    def test_full_rank_round_trip(self, rng):
        X = rng.normal(size=(30, 6))
        model = pca_fit(X, 6)
        Z = pca_transform(model, X)
        back = pca_inverse_transform(model, Z)
        assert np.max(np.abs(back - X)) <= 1e-8

    def test_projected_variances_match_dense_eigensolve(self, rng):
        X = rng.normal(size=(20, 10))
        model = pca_fit(X, 5)
        ref = pca_eigenvalues_dense(X, 5)
        assert np.allclose(model.explained_variance, ref, rtol=1e-8)
        Z = pca_transform(model, X)
        assert np.allclose(Z.var(axis=0, ddof=1), ref, rtol=1e-8)

    def test_orthonormal_and_ordered(self, rng):
        X = rng.normal(size=(15, 8))
        model = pca_fit(X, 5)
        gram = model.components @ model.components.T
        assert np.max(np.abs(gram - np.eye(5))) <= 1e-8
        assert np.all(np.diff(model.explained_variance) <= 1e-12)

    def test_gram_path_when_wide(self, rng):
        X = rng.normal(size=(10, 50))  # d > n exercises the Gram branch
        model = pca_fit(X, 5)
        gram = model.components @ model.components.T
        assert np.max(np.abs(gram - np.eye(5))) <= 1e-8
        ref = pca_eigenvalues_dense(X, 5)
        assert np.allclose(model.explained_variance, ref, rtol=1e-8)

    def test_mean_centering_invariance(self, rng):
        X = rng.normal(size=(12, 4))
        a = pca_fit(X, 3)
        b = pca_fit(X + 100.0, 3)
        assert np.allclose(a.components, b.components, atol=1e-8)

    def test_mean_maps_to_zero(self, rng):
        X = rng.normal(size=(9, 4))
        model = pca_fit(X, 2)
        assert np.allclose(pca_transform(model, model.mean), 0.0, atol=1e-12)

    def test_component_maps_to_unit_vector(self, rng):
        X = rng.normal(size=(9, 4))
        model = pca_fit(X, 2)
        z = pca_transform(model, model.mean + model.components[0])
        assert np.allclose(z, [1.0, 0.0], atol=1e-9)

    def test_rank_deficiency_flagged(self):
        X = np.zeros((6, 4))
        X[:, 0] = np.arange(6)
        model = pca_fit(X, 3)
        assert model.rank_deficient
        assert np.all(model.explained_variance[1:] == 0.0)
        gram = model.components @ model.components.T
        assert np.max(np.abs(gram - np.eye(3))) <= 1e-8

    def test_k_out_of_range(self, rng):
        X = rng.normal(size=(5, 3))
        for k in (0, 4, 5):
            with pytest.raises(ValueError):
                pca_fit(X, k)

    def test_dimension_mismatch(self, rng):
        model = pca_fit(rng.normal(size=(6, 3)), 2)
        with pytest.raises(ValueError):
            pca_transform(model, np.zeros(4))

    def test_sign_convention(self, rng):
        X = rng.normal(size=(10, 5))
        model = pca_fit(X, 3)
        for comp in model.components:
            assert comp[np.argmax(np.abs(comp))] > 0


class TestPairFeatures:
    def test_lbp_pair_length(self, rng):
        pair = make_pair(
            img1=make_image(rng.integers(0, 256, (160, 160), dtype=np.uint8)),
            img2=make_image(rng.integers(0, 256, (160, 160), dtype=np.uint8)),
        )
        vec = pair_features(pair, extractor="lbp")
        assert vec.shape == (512,)

    def test_order_sensitivity(self, rng):
        i1 = make_image(rng.integers(0, 256, (160, 160), dtype=np.uint8))
        i2 = make_image(rng.integers(0, 256, (160, 160), dtype=np.uint8))
        a = pair_features(make_pair(img1=i1, img2=i2), extractor="lbp")
        b = pair_features(make_pair(img1=i2, img2=i1), extractor="lbp")
        assert not np.array_equal(a, b)

    def test_pca_shape_contract(self, rng):
        vectors = rng.random((40, 512))
        model = pca_fit(vectors, 32)
        pair = make_pair(
            img1=make_image(rng.integers(0, 256, (160, 160), dtype=np.uint8)),
            img2=make_image(rng.integers(0, 256, (160, 160), dtype=np.uint8)),
        )
        vec = pair_features(pair, extractor="lbp", pca=model)
        assert vec.shape == (32,)

    def test_embedding_extractor(self, tmp_path, rng):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=3\np0_1,1,2,3\np0_2,4,5,6\n")
        table = load_embeddings(str(path))
        pair = make_pair(
            img1=make_image(np.zeros((160, 160))),
            img2=make_image(np.zeros((160, 160))),
        )
        pair = type(pair)(
            pair.pair_id, pair.subject_id,
            type(pair.first)(pair.first.pixels, source_id="p0_1"),
            type(pair.second)(pair.second.pixels, source_id="p0_2"),
            pair.t1, pair.t2, pair.label,
        )
        vec = pair_features(pair, extractor="embedding", embeddings=table)
        assert vec.tolist() == [1, 2, 3, 4, 5, 6]

    def test_missing_embedding_names_image(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("#dim=1\nother,1\n")
        table = load_embeddings(str(path))
        pair = make_pair()
        pair = type(pair)(
            pair.pair_id, pair.subject_id,
            type(pair.first)(pair.first.pixels, source_id="p0_1"),
            type(pair.second)(pair.second.pixels, source_id="p0_2"),
            pair.t1, pair.t2, pair.label,
        )
        with pytest.raises(EmbeddingError, match="p0_1"):
            pair_features(pair, extractor="embedding", embeddings=table)
