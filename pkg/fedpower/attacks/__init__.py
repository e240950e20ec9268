from fedpower.attacks.attacks import (  # noqa: F401
    FederatedTrainer,
    ShadowSet,
    attack_features,
    calibration_attack,
    loss_threshold_attack,
    record_table,
    shadow_model_attack,
    train_shadows,
)
from fedpower.attacks.records import AttackRecord, AttackResult, EvaluationSet, collect_records  # noqa: F401
from fedpower.attacks.roc import roc_curve, with_decision  # noqa: F401
