"""Rule-based activity reasoning over B-graph symbolic systems."""

__version__ = "0.1.0"
