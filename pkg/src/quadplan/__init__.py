"""Natural-language mission control for a simulated quadruped robot."""

__version__ = "0.1.0"
