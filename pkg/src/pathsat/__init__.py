"""Random path-coverage test data generation with saturation heuristics."""
