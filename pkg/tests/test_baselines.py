import numpy as np
import pytest

from peerlearn import baselines, data, nn, peer
from peerlearn.baselines import (
    CoTeachingStrategy,
    DecouplingStrategy,
    PlainStrategy,
    StrategyConfig,
)
from peerlearn.errors import ConfigurationError
from peerlearn.nn import LossConfig, OptimizerConfig
from peerlearn.training import run_training


def cfg_for(kind, lr=0.05, xi=0.35, t_k=10):
    return StrategyConfig(kind=kind, optimizer=OptimizerConfig(learning_rate=lr),
                          loss_cfg=LossConfig(),
                          schedule=peer.DropSchedule(xi, t_k))


def make_batch(rng, n=16, num_classes=4, dim=3):
    ds = data.generate_gaussian_dataset(num_classes, max(2, n // num_classes + 1), dim,
                                        3.0, seed=int(rng.integers(1 << 31)))
    return list(ds.samples[:n])


class TestStrategyConfig:
    def test_schedule_required_for_scheduled_kinds(self):
        with pytest.raises(ConfigurationError):
            StrategyConfig(kind="co_teaching", optimizer=OptimizerConfig())
        with pytest.raises(ConfigurationError):
            StrategyConfig(kind="peer_learning", optimizer=OptimizerConfig())

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            StrategyConfig(kind="magic", optimizer=OptimizerConfig())


class TestPlainStep:
    def test_equals_gradient_sgd_composition(self):
        rng = np.random.default_rng(0)
        m = nn.init_model([3, 5, 4], seed=1)
        batch = make_batch(rng)
        out = baselines.plain_step(m, batch, cfg_for("plain"))
        g = nn.gradient(m, data.features_matrix(batch), data.observed_labels(batch))
        expect = nn.sgd_step(m, g, 0.05)
        np.testing.assert_array_equal(out.params, expect.params)

    def test_tiny_learning_rate_barely_moves(self):
        rng = np.random.default_rng(1)
        m = nn.init_model([3, 4], seed=2)
        out = baselines.plain_step(m, make_batch(rng), cfg_for("plain", lr=1e-300))
        np.testing.assert_allclose(out.params, m.params, atol=1e-290)

    def test_convex_loss_decreases(self):
        rng = np.random.default_rng(2)
        batch = make_batch(rng, n=20)
        X, y = data.features_matrix(batch), data.observed_labels(batch)
        m = nn.init_model([3, 4], seed=3)
        cfg = cfg_for("plain", lr=0.1)
        losses = []
        for _ in range(10):
            losses.append(nn.per_example_losses(m, X, y).mean())
            m = baselines.plain_step(m, batch, cfg)
        assert all(b < a for a, b in zip(losses, losses[1:]))


class TestDecouplingStep:
    def test_identical_models_no_update(self):
        rng = np.random.default_rng(3)
        m = nn.init_model([3, 5, 4], seed=4)
        h1, h2 = baselines.decoupling_step(m, m, make_batch(rng), cfg_for("decoupling"))
        np.testing.assert_array_equal(h1.params, m.params)
        np.testing.assert_array_equal(h2.params, m.params)

    def test_single_disagreement_delta(self):
        rng = np.random.default_rng(4)
        # perturb one model until exactly one prediction flips
        for scale in np.geomspace(1e-4, 1.0, 40):
            a = nn.init_model([3, 6, 4], seed=8)
            b = nn.Model(a.layer_dims, a.params + scale * rng.normal(size=a.params.shape))
            batch = make_batch(rng)
            split = peer.split_batch(a, b, batch)
            if len(split.disagree_idx) == 1:
                break
        else:
            pytest.fail("no single-disagreement batch found")
        i = split.disagree_idx[0]
        cfg = cfg_for("decoupling", lr=0.07)
        h1, h2 = baselines.decoupling_step(a, b, batch, cfg)
        s = batch[i]
        for before, after in ((a, h1), (b, h2)):
            g = nn.gradient(before, [s.features], [s.observed_label])
            np.testing.assert_allclose(after.params, before.params - 0.07 * g, atol=1e-15)

    def test_update_restricted_to_disagreements(self):
        rng = np.random.default_rng(5)
        a = nn.init_model([3, 6, 4], seed=10)
        b = nn.init_model([3, 6, 4], seed=11)
        batch = make_batch(rng)
        split = peer.split_batch(a, b, batch)
        cfg = cfg_for("decoupling")
        h1, _ = baselines.decoupling_step(a, b, batch, cfg)
        sub = [batch[i] for i in split.disagree_idx]
        if sub:
            g = nn.gradient(a, data.features_matrix(sub), data.observed_labels(sub))
            np.testing.assert_array_equal(h1.params, a.params - cfg.optimizer.learning_rate * g)
        else:
            np.testing.assert_array_equal(h1.params, a.params)


class TestCoTeachingStep:
    def test_d_zero_is_plain_on_full_batch(self):
        rng = np.random.default_rng(6)
        a = nn.init_model([3, 6, 4], seed=12)
        b = nn.init_model([3, 6, 4], seed=13)
        batch = make_batch(rng)
        cfg = cfg_for("co_teaching")
        h1, h2 = baselines.co_teaching_step(a, b, batch, cfg, T=0)  # d(0) = 0
        np.testing.assert_array_equal(h1.params, baselines.plain_step(a, batch, cfg).params)
        np.testing.assert_array_equal(h2.params, baselines.plain_step(b, batch, cfg).params)

    def test_selection_shares_peer_rules(self):
        rng = np.random.default_rng(7)
        a = nn.init_model([3, 6, 4], seed=14)
        b = nn.init_model([3, 6, 4], seed=15)
        batch = make_batch(rng)
        cfg = cfg_for("co_teaching", xi=0.5, t_k=1)
        d = peer.drop_rate(cfg.schedule, 1)
        r2 = peer.select_small_loss(b, batch, range(len(batch)), d, cfg.loss_cfg)
        h1, _ = baselines.co_teaching_step(a, b, batch, cfg, T=1)
        sub = [batch[i] for i in sorted(r2)]
        g = nn.gradient(a, data.features_matrix(sub), data.observed_labels(sub))
        # h1 trained on h2's selection, not its own
        np.testing.assert_array_equal(h1.params, a.params - cfg.optimizer.learning_rate * g)


class TestReductionRelations:
    def small_data(self, seed=0):
        ds = data.generate_gaussian_dataset(3, 24, 4, 3.0, seed=seed)
        return data.split_train_test(ds, 6)

    def test_co_teaching_d0_equals_two_plain_runs(self):
        train_ds, test_ds = self.small_data()
        h1 = nn.init_model([4, 6, 3], seed=20)
        h2 = nn.init_model([4, 6, 3], seed=21)
        cfg = cfg_for("co_teaching", xi=0.0, t_k=1)
        ct = CoTeachingStrategy(h1, h2, cfg)
        rec_ct = run_training(ct, train_ds, test_ds, epochs=3, batch_size=6, shuffle_seed=9)
        p1 = PlainStrategy(h1, cfg_for("plain"))
        rec_p1 = run_training(p1, train_ds, test_ds, epochs=3, batch_size=6, shuffle_seed=9)
        p2 = PlainStrategy(h2, cfg_for("plain"))
        rec_p2 = run_training(p2, train_ds, test_ds, epochs=3, batch_size=6, shuffle_seed=9)
        np.testing.assert_array_equal(ct.h1.params, p1.model.params)
        np.testing.assert_array_equal(ct.h2.params, p2.model.params)
        assert rec_ct.rows[-1].test_acc_h1 == rec_p1.rows[-1].test_acc_h1
        assert rec_ct.rows[-1].test_acc_h2 == rec_p2.rows[-1].test_acc_h1

    def test_all_strategies_deterministic(self):
        train_ds, test_ds = self.small_data()
        for make in (
            lambda: PlainStrategy(nn.init_model([4, 6, 3], seed=1), cfg_for("plain")),
            lambda: DecouplingStrategy(nn.init_model([4, 6, 3], seed=1),
                                       nn.init_model([4, 6, 3], seed=2), cfg_for("decoupling")),
            lambda: CoTeachingStrategy(nn.init_model([4, 6, 3], seed=1),
                                       nn.init_model([4, 6, 3], seed=2), cfg_for("co_teaching")),
        ):
            a = run_training(make(), train_ds, test_ds, epochs=2, batch_size=6, shuffle_seed=4)
            b = run_training(make(), train_ds, test_ds, epochs=2, batch_size=6, shuffle_seed=4)
            assert a == b
