"""Search-based test input generation with sigmoid basin compression (HC-SHIFT),
plus hill-climbing and genetic-algorithm baselines."""

__version__ = "0.1.0"
