"""Safety verification of term rewriting systems by finite countermodel search."""

__version__ = "0.1.0"
