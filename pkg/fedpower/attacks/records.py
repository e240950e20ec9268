from dataclasses import dataclass, field

import numpy as np

from fedpower.exceptions import ValidationError
from fedpower.fl import Dataset
from fedpower.utils import logger


@dataclass(frozen=True)
class AttackRecord:
    sample_id: int
    loss: float
    confidence: np.ndarray
    is_member: bool


@dataclass(frozen=True)
class EvaluationSet:
    """Balanced member/non-member samples scored against a target model."""

    data: Dataset
    is_member: np.ndarray
    sample_ids: np.ndarray

    def __len__(self):
        return len(self.data)

    @classmethod
    def balanced(cls, members, non_members, size, rng):
        """`size` members and `size` non-members, fewer if a pool runs short."""
        count = min(size, len(members), len(non_members))
        if count == 0:
            raise ValidationError("member and non-member pools must both be non-empty")
        if count < size:
            logger("attacks").warning(f"evaluation set trimmed to {count} per side")
        picked_in = np.sort(rng.child(0).choice(len(members), count, replace=False))
        picked_out = np.sort(rng.child(1).choice(len(non_members), count, replace=False))
        data = Dataset.concat([members.subset(picked_in), non_members.subset(picked_out)])
        flags = np.concatenate([np.ones(count, dtype=bool), np.zeros(count, dtype=bool)])
        return cls(data=data, is_member=flags, sample_ids=np.arange(2 * count))


@dataclass(frozen=True)
class AttackResult:
    """Membership scores (higher means member) with the resulting ROC."""

    name: str
    scores: np.ndarray
    is_member: np.ndarray
    predictions: np.ndarray
    threshold: float
    accuracy: float
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    sample_ids: np.ndarray = None
    flagged: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def decision_tpr(self):
        members = self.is_member
        return float(np.mean(self.predictions[members])) if members.any() else 0.0

    @property
    def decision_fpr(self):
        outsiders = ~self.is_member
        return float(np.mean(self.predictions[outsiders])) if outsiders.any() else 0.0

    def summary(self):
        return {
            "attack": self.name,
            "accuracy": self.accuracy,
            "auc": self.auc,
            "threshold": self.threshold,
            "tpr": self.decision_tpr,
            "fpr": self.decision_fpr,
            "flagged": self.flagged,
            "roc": [[float(f), float(t)] for f, t in zip(self.fpr, self.tpr)],
            **self.extra,
        }


def collect_records(model, evaluation):
    """Loss and confidence vector per evaluation sample, from model outputs only."""
    data = evaluation.data
    losses = model.losses(data.features, data.labels)
    confidence = model.predict_proba(data.features)
    return [
        AttackRecord(int(sid), float(loss), conf, bool(member))
        for sid, loss, conf, member in zip(evaluation.sample_ids, losses, confidence, evaluation.is_member)
    ]
