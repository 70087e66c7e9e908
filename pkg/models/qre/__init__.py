# Quantal response equilibrium
