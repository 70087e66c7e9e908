# Uniform baseline
