"""Heterogeneous fiscal reaction functions on balanced country panels.

Panel ingestion and grouping, Hodrick-Prescott gaps, cross-sectional
dependence, unit-root and slope-homogeneity diagnostics, dynamic
common-correlated-effects mean-group estimation and debt sustainability
simulation.
"""

__version__ = "0.1.0"
