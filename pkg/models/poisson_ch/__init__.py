# Poisson cognitive hierarchy
