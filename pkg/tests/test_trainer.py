import numpy as np
import pytest

from thor_ordinal import data, methods
from thor_ordinal.core import Boundaries, default_boundaries
from thor_ordinal.errors import ConfigError, InfeasibleMargin, NumericFault, ShapeError
from thor_ordinal.trainer import TrainConfig, evaluate, train


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(lr=0.0), dict(epochs=0), dict(batch_size=0), dict(gamma=-0.1),
                                    dict(method="svor"), dict(select_on="f1")])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)

    def test_infeasible_margin(self):
        with pytest.raises(InfeasibleMargin):
            TrainConfig(gamma=0.7).resolve_boundaries(5)
        TrainConfig(gamma=0.7, allow_infeasible_margin=True).resolve_boundaries(5)
        # baselines never read the margin
        TrainConfig(method="orcnn", gamma=0.7).resolve_boundaries(5)

    def test_explicit_boundaries(self):
        b = Boundaries((0.0, 2.0, 4.0, 6.0))
        assert TrainConfig(boundaries=b, gamma=0.9).resolve_boundaries(3) == Boundaries(b.thresholds, 0.9)
        with pytest.raises(ConfigError):
            TrainConfig(boundaries=b).resolve_boundaries(4)


def test_linear_separable_pilot():
    spec = data.SyntheticSpec(k=3, per_class=100, d=1, noise=0.1, seed=0, transform_seed=0)
    tr, va, _ = data.split(data.generate_synthetic(spec), seed=0)
    rep = train(tr, va, TrainConfig(hidden=(), epochs=50, seed=0))
    assert rep.val_mae[-1] < 0.1


def test_noiseless_reaches_zero_train_mae():
    spec = data.SyntheticSpec(k=4, per_class=50, d=3, noise=0.0, seed=1, transform_seed=1)
    tr, va, _ = data.split(data.generate_synthetic(spec), seed=1)
    rep = train(tr, va, TrainConfig(hidden=(), epochs=60, seed=1))
    assert evaluate(rep.predictor, tr).mae == 0.0


def test_deterministic(tiny_splits, tmp_path):
    tr, va, _ = tiny_splits
    cfg = TrainConfig(method="coral", epochs=4, hidden=(5,))
    a = train(tr, va, cfg, tmp_path / "a")
    b = train(tr, va, cfg, tmp_path / "b")
    assert a.train_loss == b.train_loss and a.val_mae == b.val_mae
    for name in ("best.ckpt", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("method", methods.METHODS)
@pytest.mark.parametrize("select_on", ["mae", "accuracy"])
def test_bookkeeping(method, select_on, tiny_splits, tmp_path):
    tr, va, _ = tiny_splits
    rep = train(tr, va, TrainConfig(method=method, epochs=6, hidden=(4,), select_on=select_on), tmp_path)
    assert len(rep.train_loss) == len(rep.val_mae) == len(rep.val_accuracy) == 6
    series = rep.val_mae if select_on == "mae" else rep.val_accuracy
    target = min(series) if select_on == "mae" else max(series)
    assert series[rep.best_epoch - 1] == target
    assert series.index(target) == rep.best_epoch - 1
    lines = (tmp_path / "report.txt").read_text().splitlines()
    assert lines[0].startswith("epoch=1 train_loss=") and " val_mae=" in lines[0] and " val_acc=" in lines[0]
    assert lines[-1] == f"best_epoch={rep.best_epoch}"
    # the checkpoint reproduces the best epoch's validation metrics
    m = evaluate(methods.Predictor.load(tmp_path / "best.ckpt"), va, TrainConfig(method=method).eval_head())
    assert m.mae == rep.val_mae[rep.best_epoch - 1]


def test_convex_case_loss_descends(fixture_splits):
    tr, va, _ = fixture_splits
    rep = train(tr, va, TrainConfig(hidden=(), epochs=20))
    assert rep.train_loss[-1] < rep.train_loss[0]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_fault_names_epoch(tiny_splits):
    tr, va, _ = tiny_splits
    bad = data.OrdinalDataset(tr.features * 1e300, tr.labels, tr.k)
    with pytest.raises(NumericFault, match=r"epoch 1 batch \d+"):
        train(bad, va, TrainConfig(epochs=2, lr=1e300, hidden=(3,)))


def test_width_mismatch(tiny_splits):
    tr, va, _ = tiny_splits
    p = methods.Predictor.initial("thor", tr.d + 1, tr.k, (), 0)
    with pytest.raises(ShapeError):
        evaluate(p, va)


class TestEvaluate:
    def _thor_identity(self, k):
        from thor_ordinal.net import DenseModel

        m = DenseModel([np.array([[1.0]])], [np.array([0.0])], "identity")
        return methods.Predictor("thor", m, default_boundaries(k))

    def test_perfect_midpoints(self):
        b = default_boundaries(5)
        ds = data.OrdinalDataset(b.midpoints()[:, None], np.arange(1, 6), 5)
        r = evaluate(self._thor_identity(5), ds)
        assert (r.accuracy, r.mae) == (1.0, 0.0)

    def test_hand_case(self):
        b = default_boundaries(5)
        scores = b.midpoints()[[2, 1, 0]]
        ds = data.OrdinalDataset(scores[:, None], [1, 2, 3], 5)
        r = evaluate(self._thor_identity(5), ds)
        assert r.accuracy == 1 / 3 and r.mae == 4 / 3

    def test_hybrid_two_heads(self, tiny_splits, tmp_path):
        tr, va, te = tiny_splits
        train(tr, va, TrainConfig(method="hybrid", epochs=3, hidden=(4,)), tmp_path)
        p = methods.Predictor.load(tmp_path / "best.ckpt")
        with pytest.raises(ConfigError):
            evaluate(p, te)
        cls = evaluate(p, te, "classification")
        reg = evaluate(p, te, "regression")
        preds_c, _ = p.predict(te.features, "classification")
        preds_r, _ = p.predict(te.features, "regression")
        assert not np.array_equal(preds_c, preds_r)
        assert cls != reg

    def test_orcnn_reports_inconsistency(self, tiny_splits):
        tr, va, te = tiny_splits
        rep = train(tr, va, TrainConfig(method="orcnn", epochs=2, hidden=(3,)))
        assert evaluate(rep.predictor, te).inconsistency_rate is not None
