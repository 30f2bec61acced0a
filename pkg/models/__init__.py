"""Models package for the semilinear engine: report payloads and script syntax."""
