"""Numerical laboratory for a critical KPP front coupled to a Swift-Hohenberg field.

Submodules
----------
params      model parameters, gamma thresholds, hypothesis gate, equilibria
spectral    operator symbols, Fredholm borders, weight exponent selection
front       critical front profile and its asymptotics
weights     exponential/algebraic weights and uniformly-local norms
fields      grid and field containers shared across modules
sim         co-moving IMEX time integration of the full and perturbation systems
modefilter  Fourier-side critical/stable mode separation
gl          Ginzburg-Landau reduction, simulation and approximation experiments
evans       dichotomy ODE solutions, wronskian checks, Evans winding
diagnostics decay fits, amplitude scaling, wavenumber selection
cli         command-line entry points and run manifests
"""

__version__ = "0.1.0"

from .params import SystemParams, GateReport, check_hypotheses  # noqa: F401
