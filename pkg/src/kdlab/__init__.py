"""Numerical laboratory for the two-photon Kapitza-Dirac effect.

Modules:
    core         field configuration, mode kinematics, bispinor algebra
    dynamics     direct integration of the mode-ladder Dirac equation
    perturbation closed-form second-order amplitudes and channel analysis
    classical    ponderomotive forces and relativistic trajectories
    experiments  scenario runner with CSV/JSON output
    cli          command line entry point
"""

__version__ = "0.1.0"
