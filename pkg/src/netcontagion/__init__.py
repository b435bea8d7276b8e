"""Best-response contagion on random graphs: simulation and mean-field theory."""

__version__ = "0.1.0"
