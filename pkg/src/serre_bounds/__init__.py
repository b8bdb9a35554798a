"""Exact verification of ramification and trace constants in cyclotomic towers, plus
rigorous evaluation of explicit Serre-constant and Manin-Mumford bounds."""

__version__ = "0.1.0"
