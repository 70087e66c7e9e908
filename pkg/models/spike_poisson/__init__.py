# Spike-Poisson QCH
