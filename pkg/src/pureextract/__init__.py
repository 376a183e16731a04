"""Pure-entanglement extraction from spin-ring states by local projective measurements."""

__version__ = "0.1.0"
