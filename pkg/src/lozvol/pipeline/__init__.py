"""Subspace pipeline: embedding into l_1^n, subset selection and the enclosing cross-polytope."""
