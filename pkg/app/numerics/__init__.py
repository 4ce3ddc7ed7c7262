"""Discretization and linear-algebra layer: sparse core, pH structures, 1D/2D finite
elements, time integrators and diagnostics."""
