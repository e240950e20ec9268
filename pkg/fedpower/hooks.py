from . import __version__ as app_version  # noqa: F401

app_name = "fedpower"
app_title = "FedPower"
app_publisher = "FedPower"
app_description = "Differentially private federated LoRA with PowerDP refactorization"
app_license = "MIT"

# Environment
# -----------

# root directory for run outputs when --out is not given
output_root_env = "FEDPOWER_OUTPUT_ROOT"
default_output_root = "fedpower_runs"

# enables Lemma 1 checks and the sensitivity gate
debug_env = "FEDPOWER_DEBUG"

# Linear algebra
# --------------

ortho_tolerance = 1e-12

# Factorization
# -------------

default_power_iterations = 4

# Privacy accounting
# ------------------

# Renyi orders, 1.25 ... 512
default_orders = (
    1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0, 3.5, 4.0, 4.5,
    *[float(a) for a in range(5, 64)],
    64.0, 128.0, 256.0, 512.0,
)
sigma_search_bracket = (0.3, 1e6)
sigma_search_rtol = 1e-4

# Communication
# -------------

value_width_bits = 32

# Attacks
# -------

default_shadow_count = 8
sigma_out_floor = 1e-6

# Presets
# -------

preset_names = ("nonprivate", "eps9", "eps6", "eps3")

# overfitting control for the membership attacks
control_presets = ("overfit",)

# Sweeps and reports
# ------------------

sweep_axes = ("epsilon", "refactor_frequency", "protocol", "noise_scheme")
default_target_accuracy = 0.8

# Jobs
# ----

# dotted paths resolved by the sweep and attack runners
job_handlers = {
    "run": "fedpower.tasks.run_job",
    "attack": "fedpower.tasks.attack_job",
}
