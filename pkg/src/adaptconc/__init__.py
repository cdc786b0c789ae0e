"""Concentration bounds for sums of adapted [0, 1] variables whose threshold
depends on an observed bias statistic.

Modules: ``bounds`` (closed-form inequalities and baselines), ``certify``
(grid certification of the proof conditions), ``simulate`` (Monte Carlo
soundness checks), ``invert`` (epsilon for a target probability) and ``cli``.
"""

__version__ = "0.1.0"
