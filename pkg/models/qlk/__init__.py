# Quantal level-k
