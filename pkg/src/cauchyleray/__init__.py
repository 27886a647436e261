"""Cauchy-Leray-Koppelman integral operators for the dbar-problem on
C-linearly convex domains, with numerical verification tools."""

__version__ = "0.1.0"
