"""
Instance-KL
Discrete distribution estimation under KL loss, with and without
differential privacy.

Estimators (add-constant, Good-Turing, "Sampling Twice" and their
Laplace-mechanism variants), minimax and per-instance bound calculators,
and a seeded Monte-Carlo benchmark harness that writes CSV tables.

Quick start:
    from instance_kl.data_io import power_law
    from instance_kl.sampling import NoiseSource, split_sample
    from instance_kl.estimators import sampling_twice

    p = power_law(1000, 1.5)
    s = split_sample(p, 500, 0.5, NoiseSource(7))
    q = sampling_twice(s, tau=0.0)
"""

import logging

__version__ = "0.1.0"
__author__ = "instance-kl contributors"

logging.getLogger(__name__).addHandler(logging.NullHandler())

# Shared constants used across all modules
NORMALIZATION_TOL = 1e-9   # |sum(p) - 1| accepted for a ProbVector
IDEMPOTENCE_TOL = 1e-12
CSV_FLOAT_FORMAT = "%.9g"

# Hyperparameter grids searched for the Sampling Twice estimators
DEFAULT_ALPHA_GRID = (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99)
DEFAULT_TAU_MULT_GRID = (0.0, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0)
