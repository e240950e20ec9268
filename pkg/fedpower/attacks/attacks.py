from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from sklearn.linear_model import LogisticRegression

from fedpower import hooks
from fedpower.attacks.roc import roc_curve, with_decision
from fedpower.exceptions import ConfigError, SingleClassError, ValidationError
from fedpower.fl import Dataset, run_experiment
from fedpower.utils import logger

# smallest shadow training subset
MIN_SHADOW_SAMPLES = 4


@dataclass(frozen=True)
class ShadowSet:
    models: tuple
    members: tuple
    held_out: Dataset


class FederatedTrainer:
    """Trains a shadow exactly like the target: same config, data spread over its clients."""

    def __init__(self, config, task):
        self.config = config
        self.task = task

    def __call__(self, data, rng):
        parts = min(self.config.task.clients, len(data))
        order = rng.child(0).permutation(len(data))
        clients = [data.subset(np.sort(chunk)) for chunk in np.array_split(order, parts)]
        seed = int(rng.child(1).generator.integers(2**31))
        config = replace(self.config, seed=seed, name=f"{self.config.name}-shadow")
        result = run_experiment(config, task=self.task.with_client_data(clients))
        return result.released_model


def train_shadows(aux_pool, s, trainer, rng, workers=1):
    """s shadows on disjoint aux subsets; the last equal share is held out as non-members."""
    if s < 2:
        raise ConfigError(f"need at least 2 shadow models, got {s}")
    share = len(aux_pool) // (s + 1)
    if share < MIN_SHADOW_SAMPLES:
        raise ConfigError(
            f"auxiliary pool of {len(aux_pool)} samples cannot feed {s} shadows "
            f"with {MIN_SHADOW_SAMPLES}+ samples each plus a held-out share"
        )
    order = rng.child(0).permutation(len(aux_pool))
    subsets = [aux_pool.subset(np.sort(order[i * share:(i + 1) * share])) for i in range(s + 1)]
    members, held_out = subsets[:s], subsets[s]

    log = logger("attacks")
    log.info(f"training {s} shadow models on {share} samples each")
    jobs = [(data, rng.child(1, i)) for i, data in enumerate(members)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            models = list(pool.map(lambda job: trainer(*job), jobs))
    else:
        models = [trainer(data, stream) for data, stream in jobs]
    return ShadowSet(models=tuple(models), members=tuple(members), held_out=held_out)


def attack_features(model, data):
    """Confidence vector sorted high to low, then the loss."""
    confidence = -np.sort(-model.predict_proba(data.features), axis=1)
    losses = model.losses(data.features, data.labels)
    return np.column_stack([confidence, losses])


def _fit(features, labels):
    return LogisticRegression(max_iter=1000).fit(features, labels)


def shadow_model_attack(target_model, aux_pool, s, trainer, evaluation, rng, shadows=None, workers=1):
    """Per-class logistic attack models fitted on shadow (in, out) outputs, applied to the target."""
    shadows = shadows or train_shadows(aux_pool, s, trainer, rng, workers=workers)
    features, labels, classes = [], [], []
    for model, members in zip(shadows.models, shadows.members):
        for data, flag in ((members, True), (shadows.held_out, False)):
            features.append(attack_features(model, data))
            labels.append(np.full(len(data), flag))
            classes.append(data.labels)
    features, labels, classes = np.concatenate(features), np.concatenate(labels), np.concatenate(classes)
    if labels.all() or not labels.any():
        raise SingleClassError("shadow outputs carry a single membership label")

    fallback = _fit(features, labels)
    per_class = {}
    for c in np.unique(classes):
        picked = classes == c
        if len(np.unique(labels[picked])) == 2:
            per_class[int(c)] = _fit(features[picked], labels[picked])

    target = attack_features(target_model, evaluation.data)
    scores = np.empty(len(evaluation))
    for c in np.unique(evaluation.data.labels):
        picked = evaluation.data.labels == c
        model = per_class.get(int(c), fallback)
        scores[picked] = model.predict_proba(target[picked])[:, 1]

    result = roc_curve(scores, evaluation.is_member, name="shadow", sample_ids=evaluation.sample_ids)
    result = with_decision(result, scores >= 0.5, 0.5, shadows=len(shadows.models),
                           attack_models=len(per_class))
    logger("attacks").info(f"shadow attack accuracy {result.accuracy:.4f} auc {result.auc:.4f}")
    return result


def loss_threshold_attack(target_model, shadow_model, aux, evaluation):
    """Member iff target loss < tau, with tau the shadow's mean loss over aux."""
    if len(aux) == 0:
        raise ValidationError("loss threshold attack needs a non-empty auxiliary pool")
    tau = float(np.mean(shadow_model.losses(aux.features, aux.labels)))
    losses = target_model.losses(evaluation.data.features, evaluation.data.labels)
    result = roc_curve(-losses, evaluation.is_member, name="loss", sample_ids=evaluation.sample_ids)
    result = with_decision(result, losses < tau, tau)
    logger("attacks").info(f"loss attack tau={tau:.4f} accuracy {result.accuracy:.4f}")
    return result


def calibration_attack(target_model, shadows, evaluation, tau=None, trained_on=None,
                       sigma_floor=hooks.sigma_out_floor):
    """Member iff (loss - mu_out) / sigma_out < tau, per sample.

    mu_out and sigma_out come from the shadows that did not train on the sample;
    `trained_on[j, i]` marks shadow j as having seen sample i. With tau None the
    balanced-accuracy-optimal threshold is used.
    """
    data = evaluation.data
    out_losses = np.array([m.losses(data.features, data.labels) for m in shadows])
    mask = np.zeros(out_losses.shape, dtype=bool) if trained_on is None else np.asarray(trained_on, bool)
    if mask.shape != out_losses.shape:
        raise ValidationError(f"trained_on is {mask.shape}, expected {out_losses.shape}")
    outside = (~mask).sum(axis=0)
    if outside.min(initial=2) < 2:
        raise ValidationError("every scored sample needs at least two shadows that excluded it")

    held = np.ma.masked_array(out_losses, mask=mask)
    mu = held.mean(axis=0).filled(np.nan)
    sd = held.std(axis=0, ddof=1).filled(np.nan)
    degenerate = ~(sd > 0)
    flagged = int(degenerate.sum())
    if flagged:
        logger("attacks").warning(f"{flagged} samples have zero shadow loss spread; using floor {sigma_floor}")
    sd = np.where(degenerate, sigma_floor, sd)

    z = (target_model.losses(data.features, data.labels) - mu) / sd
    result = roc_curve(-z, evaluation.is_member, name="calibration", sample_ids=evaluation.sample_ids)
    if tau is None:
        # z < nextafter(-threshold) selects exactly the records with -z >= threshold
        tau = float(np.nextafter(-result.threshold, np.inf))
    predictions = z < tau
    result = with_decision(result, predictions, tau, flagged=flagged)
    logger("attacks").info(f"calibration attack tau={tau:.4f} accuracy {result.accuracy:.4f}")
    return result


def record_table(result, records):
    """Rows for attack.csv: one per scored record."""
    return [
        {
            "attack": result.name,
            "sample_id": rec.sample_id,
            "is_member": int(rec.is_member),
            "loss": rec.loss,
            "max_confidence": float(np.max(rec.confidence)),
            "score": float(score),
            "predicted_member": int(pred),
        }
        for rec, score, pred in zip(records, result.scores, result.predictions)
    ]
