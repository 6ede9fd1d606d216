"""flexopt: two-stage rolling-horizon optimization of flexible energy resources."""

__version__ = "0.1.0"
