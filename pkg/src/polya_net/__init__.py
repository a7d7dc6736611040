"""Network contagion dynamics driven by super-urn sampling.

Submodules:
    graph       network topology, generators, spectral radius
    contagion   urn state machine and one-step dynamics
    exact       exact finite-horizon distributions and closed forms
    approx      classical single-urn approximations of node processes
    sis         discrete-time SIS comparator and epidemic threshold
    montecarlo  reproducible trial runner and statistics
    cli         command-line entry point
"""

__version__ = "0.1.0"
