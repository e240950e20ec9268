from fedpower.harness.presets import overfit_control, preset  # noqa: F401
from fedpower.harness.report import bits_to_target, first_crossing, report  # noqa: F401
from fedpower.harness.sweep import apply_axis, summarize_runs, sweep  # noqa: F401
