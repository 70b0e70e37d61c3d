"""lozvol - Lozanovskii weights, enclosing cross-polytopes and volume/section inequalities for unconditional norms."""

__version__ = "0.1.0"
