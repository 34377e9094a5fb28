import numpy as np
import pytest

from coverml.models.fm import FMModel, FMParams, fm_loss_and_grad, fm_raw_scores, train_fm
from coverml.models.linear import LogisticModel

from helpers import fm_pairwise_score, grad_check


class TestScoreIdentity:
    def test_hand_case(self):
        # x=[1,1], w0=0, w=0, v1=v2=[1]: the single pairwise term is 1.0
        X = np.array([[1.0, 1.0]])
        V = np.ones((2, 1))
        score = fm_raw_scores(X, 0.0, np.zeros(2), V)
        assert score[0] == 1.0
        assert fm_pairwise_score(X[0], 0.0, np.zeros(2), V) == 1.0

    def test_identity_matches_pairwise_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            d, k = int(rng.integers(1, 8)), int(rng.integers(1, 5))
            X = rng.normal(size=(6, d))
            w0 = float(rng.normal())
            w = rng.normal(size=d)
            V = rng.normal(size=(d, k))
            fast = fm_raw_scores(X, w0, w, V)
            slow = [fm_pairwise_score(x, w0, w, V) for x in X]
            assert np.allclose(fast, slow, atol=1e-9)


class TestReductionToLogistic:
    def test_zero_factors_share_score_path(self):
        rng = np.random.default_rng(1)
        w = rng.normal(size=4)
        b = float(rng.normal())
        X = rng.normal(size=(50, 4))
        fm = FMModel(b, w, np.zeros((4, 3)), threshold=0.5)
        lr = LogisticModel(w, b, threshold=0.5)
        assert np.array_equal(fm.raw_scores(X), lr.raw_scores(X))
        assert np.array_equal(fm.probabilities(X), lr.probabilities(X))
        assert np.array_equal(fm.predictions(X), lr.predictions(X))

    def test_zero_init_keeps_factors_at_zero(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(60, 3))
        y = rng.integers(0, 2, size=60)
        model = train_fm(X, y, FMParams(init_std=0.0, max_iter=3))
        assert (model.V == 0.0).all()


class TestTraining:
    def test_seed_determinism(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(80, 4))
        y = rng.integers(0, 2, size=80)
        a = train_fm(X, y, FMParams(seed=5))
        b = train_fm(X, y, FMParams(seed=5))
        assert a.to_dict() == b.to_dict()
        c = train_fm(X, y, FMParams(seed=6))
        assert c.to_dict() != a.to_dict()

    def test_learns_separable_data(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(200, 2))
        y = (X[:, 0] + X[:, 1] > 0).astype(int)
        model = train_fm(X, y, FMParams(max_iter=30))
        assert (model.predictions(X) == y).mean() > 0.9

    def test_probabilities_in_unit_interval(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 2, size=40)
        model = train_fm(X, y)
        probs = model.probabilities(X)
        assert ((probs >= 0) & (probs <= 1)).all()

    def test_gradient_check(self):
        rng = np.random.default_rng(6)
        for _ in range(15):
            n, d, k = int(rng.integers(2, 10)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
            X = rng.normal(size=(n, d))
            ys = rng.choice([-1.0, 1.0], size=n)

            def value_and_grad(theta):
                w0 = theta[0]
                w = theta[1 : 1 + d]
                V = theta[1 + d :].reshape(d, k)
                loss, g0, gw, gV = fm_loss_and_grad(X, ys, w0, w, V)
                return loss, np.concatenate(([g0], gw, gV.ravel()))

            theta = rng.normal(size=1 + d + d * k) * 0.5
            assert grad_check(value_and_grad, theta) < 1e-5

    def test_param_validation(self):
        with pytest.raises(ValueError):
            FMParams(factor_dim=0)
        with pytest.raises(ValueError):
            FMParams(init_std=-1.0)
        with pytest.raises(ValueError):
            FMParams(step_size=0.0)

    def test_serialization_roundtrip(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(30, 3))
        y = rng.integers(0, 2, size=30)
        model = train_fm(X, y, FMParams(max_iter=2))
        back = FMModel.from_dict(model.to_dict())
        assert np.array_equal(back.raw_scores(X), model.raw_scores(X))
        assert back.V.shape == model.V.shape
