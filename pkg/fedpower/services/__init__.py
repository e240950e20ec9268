from fedpower.services.attack_service import ATTACKS, AttackService  # noqa: F401
from fedpower.services.experiment_service import ExperimentService, LoadedRun  # noqa: F401
