import os
import unittest

import numpy as np

from fedpower.attacks import (
    EvaluationSet,
    FederatedTrainer,
    calibration_attack,
    collect_records,
    loss_threshold_attack,
    roc_curve,
    shadow_model_attack,
    train_shadows,
)
from fedpower.exceptions import ConfigError, SingleClassError, ValidationError
from fedpower.fl import Dataset, ReleasedModel
from fedpower.linalg import RngStream

SLOW = os.environ.get("FEDPOWER_SLOW_TESTS") == "1"


def id_dataset(ids, classes=3):
    """Samples whose first feature is their id, so stub models can look them up."""
    ids = np.asarray(ids, dtype=np.float64)
    features = np.column_stack([ids, np.zeros_like(ids)])
    return Dataset(features, ids.astype(np.int64) % classes)


class LookupModel:
    """Released-model stand-in whose per-sample loss is a table lookup."""

    def __init__(self, table, default=1.0, classes=3):
        self.table = table
        self.default = default
        self.classes = classes

    def losses(self, x, y):
        return np.array([self.table.get(int(i), self.default) for i in x[:, 0]])

    def predict_proba(self, x):
        return np.full((len(x), self.classes), 1.0 / self.classes)


def memorizing_trainer(data, rng):
    return LookupModel({int(i): 0.0 for i in data.features[:, 0]})


def separated_evaluation(count=50):
    members = id_dataset(range(count))
    outsiders = id_dataset(range(1000, 1000 + count))
    return EvaluationSet.balanced(members, outsiders, count, RngStream(0)), members


class TestRocCurve(unittest.TestCase):
    def test_hand_computed_auc(self):
        result = roc_curve([0.9, 0.8, 0.7, 0.6, 0.4, 0.2], [True, True, False, True, False, False])
        self.assertAlmostEqual(result.auc, 8 / 9, places=12)

    def test_perfect_and_constant_scores(self):
        self.assertEqual(roc_curve([0.9, 0.8, 0.1, 0.2], [True, True, False, False]).auc, 1.0)
        flat = roc_curve([0.5] * 6, [True, False] * 3)
        self.assertEqual(flat.auc, 0.5)

    def test_roc_is_monotone_and_accuracy_bounded(self):
        gen = np.random.default_rng(0)
        for _ in range(50):
            size = int(gen.integers(2, 60))
            flags = gen.random(size) < 0.5
            flags[0], flags[1] = True, False
            result = roc_curve(np.round(gen.normal(size=size), 1), flags)
            self.assertTrue(np.all(np.diff(result.fpr) >= 0))
            self.assertTrue(np.all(np.diff(result.tpr) >= 0))
            self.assertTrue(0.0 <= result.accuracy <= 1.0)

    def test_single_class_rejected(self):
        with self.assertRaises(SingleClassError):
            roc_curve([0.1, 0.2], [True, True])


class TestLossThresholdAttack(unittest.TestCase):
    def test_constructed_separation(self):
        evaluation, members = separated_evaluation()
        target = LookupModel({int(i): 0.0 for i in members.features[:, 0]})
        shadow = LookupModel({0: 0.0, 1: 1.0})
        result = loss_threshold_attack(target, shadow, id_dataset([0, 1]), evaluation)
        self.assertEqual(result.threshold, 0.5)
        self.assertEqual(result.accuracy, 1.0)
        self.assertEqual(result.auc, 1.0)

    def test_threshold_below_every_loss(self):
        evaluation, _ = separated_evaluation()
        result = loss_threshold_attack(LookupModel({}, default=2.0), LookupModel({}, default=0.1),
                                       id_dataset([5, 6]), evaluation)
        self.assertEqual(result.decision_tpr, 0.0)
        self.assertEqual(result.decision_fpr, 0.0)

    def test_empty_aux_rejected(self):
        evaluation, _ = separated_evaluation()
        with self.assertRaises(ValidationError):
            loss_threshold_attack(LookupModel({}), LookupModel({}), id_dataset([]), evaluation)


class TestCalibrationAttack(unittest.TestCase):
    def test_depressed_member_losses_are_detected(self):
        gen = np.random.default_rng(1)
        evaluation, _ = separated_evaluation(100)
        ids = [int(i) for i in evaluation.data.features[:, 0]]
        shadow_losses = gen.uniform(0.5, 2.0, size=(8, len(ids)))
        shadows = [LookupModel(dict(zip(ids, row))) for row in shadow_losses]
        mu, sd = shadow_losses.mean(axis=0), shadow_losses.std(axis=0, ddof=1)
        target_losses = np.where(evaluation.is_member, mu - 3 * sd, mu)
        target = LookupModel(dict(zip(ids, target_losses)))
        result = calibration_attack(target, shadows, evaluation, tau=-1.5)
        self.assertGreaterEqual(result.accuracy, 0.99)
        self.assertEqual(result.flagged, 0)

    def test_target_equal_to_shadows_is_a_coin_flip(self):
        evaluation, _ = separated_evaluation()
        same = LookupModel({}, default=0.7)
        result = calibration_attack(same, [same] * 4, evaluation, tau=0.0)
        self.assertEqual(result.accuracy, 0.5)
        self.assertEqual(result.flagged, len(evaluation))

    def test_default_tau_matches_explicit_tau_on_ties(self):
        evaluation, _ = separated_evaluation(40)
        ids = [int(i) for i in evaluation.data.features[:, 0]]
        members = np.flatnonzero(evaluation.is_member)
        outsiders = np.flatnonzero(~evaluation.is_member)
        losses = np.full(len(ids), 2.5)
        losses[members[: len(members) // 2]] = 1.0
        losses[outsiders[len(outsiders) // 2:]] = 4.0
        target = LookupModel(dict(zip(ids, losses)))
        # every sample sees shadow losses 1..4, so loss 2.5 sits exactly at z = 0
        shadows = [LookupModel({}, default=v) for v in (1.0, 2.0, 3.0, 4.0)]

        auto = calibration_attack(target, shadows, evaluation)
        again = calibration_attack(target, shadows, evaluation, tau=auto.threshold)
        self.assertTrue(np.array_equal(auto.predictions, again.predictions))
        self.assertEqual(auto.accuracy, again.accuracy)
        self.assertAlmostEqual(auto.accuracy, 0.75)
        tied = auto.predictions[losses == 2.5]
        self.assertTrue(tied.all() or not tied.any())

    def test_needs_two_excluding_shadows(self):
        evaluation, _ = separated_evaluation(5)
        trained_on = np.zeros((3, len(evaluation)), dtype=bool)
        trained_on[:2, 0] = True
        with self.assertRaises(ValidationError):
            calibration_attack(LookupModel({}), [LookupModel({})] * 3, evaluation, trained_on=trained_on)


class TestShadowModelAttack(unittest.TestCase):
    def test_perfect_separation(self):
        evaluation, members = separated_evaluation()
        target = LookupModel({int(i): 0.0 for i in members.features[:, 0]})
        aux = id_dataset(range(5000, 5090))
        result = shadow_model_attack(target, aux, 8, memorizing_trainer, evaluation, RngStream(2))
        self.assertGreaterEqual(result.accuracy, 0.99)
        self.assertGreaterEqual(result.auc, 0.99)

    def test_random_target_is_indistinguishable(self):
        gen = np.random.default_rng(3)
        pool = Dataset(gen.normal(size=(3000, 6)), gen.integers(0, 3, size=3000))
        target = ReleasedModel(gen.normal(size=(3, 6)))
        evaluation = EvaluationSet.balanced(pool.subset(range(1000)), pool.subset(range(1000, 2000)),
                                            500, RngStream(4))

        def untrained(data, rng):
            return ReleasedModel(rng.normal((3, 6)))

        result = shadow_model_attack(target, pool.subset(range(2000, 3000)), 4, untrained, evaluation,
                                     RngStream(5))
        self.assertGreaterEqual(result.accuracy, 0.45)
        self.assertLessEqual(result.accuracy, 0.55)

    def test_pool_too_small(self):
        with self.assertRaises(ConfigError):
            train_shadows(id_dataset(range(10)), 8, memorizing_trainer, RngStream(0))
        with self.assertRaises(ConfigError):
            train_shadows(id_dataset(range(100)), 1, memorizing_trainer, RngStream(0))


class TestRecords(unittest.TestCase):
    def test_confidences_sum_to_one(self):
        gen = np.random.default_rng(6)
        model = ReleasedModel(gen.normal(size=(4, 5)))
        data = Dataset(gen.normal(size=(40, 5)), gen.integers(0, 4, size=40))
        evaluation = EvaluationSet.balanced(data.subset(range(20)), data.subset(range(20, 40)), 20, RngStream(7))
        for record in collect_records(model, evaluation):
            self.assertGreaterEqual(record.loss, 0.0)
            self.assertAlmostEqual(float(record.confidence.sum()), 1.0, delta=1e-9)

    def test_balanced_counts(self):
        evaluation, _ = separated_evaluation(30)
        self.assertEqual(int(evaluation.is_member.sum()), 30)
        self.assertEqual(len(evaluation), 60)


class TestFederatedTrainer(unittest.TestCase):
    def test_trains_a_released_model(self):
        from fedpower.fl.test_simulation import tiny_config
        from fedpower.fl import SyntheticTask

        config = tiny_config(T=2)
        task = SyntheticTask.generate(config.task)
        model = FederatedTrainer(config, task)(task.aux, RngStream(8))
        self.assertEqual(model.weight.shape, (4, 10))


if __name__ == "__main__":
    unittest.main()
