"""
Tests package for the MCNN consolidation solver.
"""
