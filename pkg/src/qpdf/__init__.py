"""Quantum-pipeline simulator for PDF transport in a perfectly stirred reactor."""
__version__ = "0.1.0"
