from dataclasses import replace

import numpy as np
from sklearn import metrics

from fedpower.attacks.records import AttackResult
from fedpower.exceptions import SingleClassError


def roc_curve(scores, is_member, name="roc", sample_ids=None):
    """ROC over every distinct score, trapezoid AUC and the balanced-accuracy threshold.

    A record is called a member when its score is >= the threshold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    is_member = np.asarray(is_member, dtype=bool)
    if is_member.all() or not is_member.any():
        raise SingleClassError("ROC needs both members and non-members")

    fpr, tpr, thresholds = metrics.roc_curve(is_member, scores, drop_intermediate=False)
    area = float(metrics.auc(fpr, tpr))
    balanced = (tpr + 1.0 - fpr) / 2.0
    best = int(np.argmax(balanced))
    threshold = float(thresholds[best])
    predictions = scores >= threshold
    return AttackResult(
        name=name,
        scores=scores,
        is_member=is_member,
        predictions=predictions,
        threshold=threshold,
        accuracy=float(np.mean(predictions == is_member)),
        fpr=fpr,
        tpr=tpr,
        thresholds=thresholds,
        auc=area,
        sample_ids=sample_ids,
    )


def with_decision(result, predictions, threshold, **extra):
    """Replace the balanced-optimal decision with an attack's own rule."""
    predictions = np.asarray(predictions, dtype=bool)
    return replace(
        result,
        predictions=predictions,
        threshold=float(threshold),
        accuracy=float(np.mean(predictions == result.is_member)),
        flagged=extra.pop("flagged", result.flagged),
        extra={**result.extra, **extra},
    )
