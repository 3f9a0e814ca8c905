"""(2+1)-DEGA and baseline optimizers on pseudo-Boolean benchmarks."""

__version__ = "0.1.0"
