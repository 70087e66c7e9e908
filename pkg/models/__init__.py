# Behavioral model families
