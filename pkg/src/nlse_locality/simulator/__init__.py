"""Split-step simulator for two 1-dimensional particles."""

# Lazy exports: nonlinearity imports .grid while splitstep imports nonlinearity.
import importlib

_EXPORTS = {
    "BoxEdgeWarning": "grid",
    "BoxMarginError": "specs",
    "ClosedForm": "specs",
    "Displaced": "specs",
    "Grid2D": "grid",
    "Harmonic2": "specs",
    "IdenticalReport": "experiments",
    "NoPotential": "specs",
    "NumericalGuardError": "splitstep",
    "Observable": "observables",
    "SimConfig": "experiments",
    "SymmetrizedPair": "specs",
    "Trajectory": "splitstep",
    "WaveField": "grid",
    "X0Report": "experiments",
    "cross_term": "observables",
    "evolve": "splitstep",
    "fornberg_weights": "stencils",
    "forward_derivative": "stencils",
    "identical_particle_experiment": "experiments",
    "lambda_sensitivity": "experiments",
    "marginal_density": "observables",
    "moment": "observables",
    "set_threads": "grid",
    "x0_independence_check": "experiments",
}


def __getattr__(name):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    return getattr(importlib.import_module(f".{module}", __name__), name)


__all__ = sorted(_EXPORTS)
