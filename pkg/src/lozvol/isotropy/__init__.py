"""Isotropic position, summing-norm lower bounds and numerical checks of the section inequalities."""
