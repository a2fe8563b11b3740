"""Linear-optics phase-covariant cloning attack on BB84."""
__version__ = "0.1.0"
