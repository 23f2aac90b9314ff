"""
Instance-KL Tools - Experiment Front End

- sweeps: benchmark cross products and hyperparameter grid search
- cli: the `instance-kl` command (estimate, benchmark, bounds, gridsearch)

Quick start:
    from instance_kl.tools.sweeps import SweepSpec, run_benchmark
    frame = run_benchmark(SweepSpec(dist="uniform", d_values=(100,), n_values=(100,)))
"""

from instance_kl.tools.sweeps import SweepSpec, run_benchmark, run_gridsearch
