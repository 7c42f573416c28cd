"""
penaltylab
Penalty-coefficient studies of QUBO encodings for coloring, clique cover and machine scheduling
"""

__version__ = "0.1.0"
