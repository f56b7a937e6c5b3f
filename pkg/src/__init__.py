"""
MCNN large-strain consolidation solver.
"""
