"""Desk-scale certification toolkit for Roumieu ultradifferentiable classes."""

__version__ = "0.1.0"
