# Nash equilibrium with error
