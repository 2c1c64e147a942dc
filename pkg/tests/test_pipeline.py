import numpy as np
import pytest

from ontd.admm import AdmmParams
from ontd.core import OntdModel, reconstruct
from ontd.pipeline import decompose, decompose_exact, extract_features, mode_seeds
from ontd.recovery import match_factors
from ontd.synth import SynthSpec, gen_tensor

from instances import synthetic_specs

SMALL_THETA = AdmmParams(theta=1e-5)


def test_full_rank_all_identity_returns_input():
    A = np.random.default_rng(0).random((3, 4, 2))
    rep = decompose(A, A.shape, partial={0, 1, 2})
    np.testing.assert_array_equal(rep.model.core, A)
    assert rep.model.identity_modes == (0, 1, 2)
    assert rep.relative_error == 0.0


def test_small_synthetic_end_to_end():
    # theta well below the data scale, see test_recovery for why
    for seed in range(5):
        A, truth = gen_tensor(SynthSpec((12, 10, 8), (3, 2, 2), seed=seed))
        rep = decompose(A, (3, 2, 2), params=SMALL_THETA)
        assert rep.relative_error <= 1e-3
        for U, V in zip(truth.factors, rep.model.factors):
            assert match_factors(U, V)[1] <= 1e-3


def test_noisy_factor_recovery():
    for spec in synthetic_specs(5, noise=0.05):
        A, truth = gen_tensor(spec)
        rep = decompose(A, spec.ranks, params=SMALL_THETA)
        for U, V in zip(truth.factors, rep.model.factors):
            assert match_factors(U, V)[1] <= 0.1


def test_error_non_increasing_with_rank():
    A, _ = gen_tensor(SynthSpec((12, 12, 16), (3, 3, 8), seed=3))
    errs = [decompose(A, (3, 3, J)).relative_error for J in (2, 4, 6)]
    assert errs[0] >= errs[1] >= errs[2]


def test_report_fields():
    A, _ = gen_tensor(SynthSpec((8, 6, 5), (2, 2, 2), seed=1))
    rep = decompose(A, (2, 2, 2))
    assert rep.space_savings == 1.0 - rep.compression_ratio
    assert rep.relative_error >= 0
    assert [m.mode for m in rep.modes] == [0, 1, 2]
    for m in rep.modes:
        assert m.residuals.shape == (m.iterations, 3)
        assert np.all(np.abs(m.trace - 2) <= 1e-10)
    assert {"mode0", "core", "metrics"} <= set(rep.timings)


def test_partial_mode_keeps_identity():
    A, _ = gen_tensor(SynthSpec((8, 6, 5), (2, 2, 2), seed=1))
    rep = decompose(A, (2, 6, 2), partial=[1])
    assert rep.model.factors[1] is None and rep.modes[1].identity
    assert rep.model.core.shape == (2, 6, 2)


@pytest.mark.parametrize("ranks, partial", [((0, 2, 2), ()), ((9, 2, 2), ()), ((2, 3, 2), (1,)),
                                            ((2, 2), ()), ((2, 2, 2), (5,))])
def test_rank_validation(ranks, partial):
    with pytest.raises(ValueError):
        decompose(np.ones((8, 6, 5)), ranks, partial=partial)


def test_negative_input_rejected():
    with pytest.raises(ValueError):
        decompose(-np.ones((3, 3)), (1, 1))


def test_deterministic_and_parallel_matches_sequential():
    A, _ = gen_tensor(synthetic_specs(1)[0])
    ranks = synthetic_specs(1)[0].ranks
    a = decompose(A, ranks, seed=4)
    b = decompose(A, ranks, seed=4)
    c = decompose(A, ranks, seed=4, parallel=True)
    for r in (b, c):
        np.testing.assert_array_equal(a.model.core, r.model.core)
        for U, V in zip(a.model.factors, r.model.factors):
            np.testing.assert_array_equal(U, V)
        assert a.relative_error == r.relative_error


def test_mode_seeds_distinct_and_stable():
    s = mode_seeds(0, 4)
    assert len(set(s)) == 4 and s == mode_seeds(0, 4)


def test_max_iter_becomes_warning():
    A, _ = gen_tensor(SynthSpec((8, 6, 5), (2, 2, 2), seed=1))
    rep = decompose(A, (2, 2, 2), params=AdmmParams(max_iter=2))
    assert not rep.converged and len(rep.warnings) == 3


def test_exact_route_on_synthetics():
    for spec in synthetic_specs(10):
        A, truth = gen_tensor(spec)
        model = decompose_exact(A, spec.ranks)
        np.testing.assert_allclose(model.core.sum(), truth.core.sum(), rtol=1e-10)
        assert np.linalg.norm(A - reconstruct(model)) <= 1e-10 * np.linalg.norm(A)


def test_extract_features_dominant_slice():
    core = np.zeros((3, 2, 2))
    core[1] = 5.0
    core[0] = 1.0
    feats = extract_features(OntdModel(core, [np.eye(3), None, None]))
    np.testing.assert_array_equal(feats[1], np.ones((2, 2)))
    np.testing.assert_array_equal(feats[0], 0)
    np.testing.assert_array_equal(feats[2], 0)


def test_extract_features_indicator_slices():
    labels = np.array([[0, 1], [2, 1]])
    core = np.stack([(labels == i).astype(float) for i in range(3)])
    feats = extract_features(OntdModel(core, [np.eye(3), None, None]))
    for i in range(3):
        np.testing.assert_array_equal(feats[i], labels == i)


def test_extract_features_ties_go_to_lowest_index():
    feats = extract_features(OntdModel(np.ones((2, 3)), [np.eye(2), None]))
    np.testing.assert_array_equal(feats[0], 1)
    np.testing.assert_array_equal(feats[1], 0)


def test_extract_features_wrong_pattern():
    with pytest.raises(ValueError):
        extract_features(OntdModel(np.ones((2, 2)), [None, np.eye(2)]))
    with pytest.raises(ValueError):
        extract_features(OntdModel(np.ones((2, 2)), [np.eye(2), np.eye(2)]))
