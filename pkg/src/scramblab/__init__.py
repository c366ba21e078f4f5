"""scramblab: desk-scale simulators for scrambling dynamics, shocked
pseudorandom state ensembles, permutation-oracle query games, exact
Haar-moment calculus, and circuit-rewrite complexity proxies."""

__version__ = "0.1.0"
