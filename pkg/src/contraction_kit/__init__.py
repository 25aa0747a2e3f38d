"""Contraction metrics, converse-Banach synthesis, and CLS verifiers.

Everything that decides an inequality does so exactly over rationals; float
arithmetic is confined to the power-iteration module and its high-precision
replay oracle.
"""

__version__ = "0.1.0"
