# EMField - physics core for EMF exposure mapping
"""
2-D TM volume-integral-equation engine: forward solves, physics losses,
field reconstruction, path-loss maps and evaluation metrics
"""

__version__ = "0.1.0"
__author__ = "EMField Team"
