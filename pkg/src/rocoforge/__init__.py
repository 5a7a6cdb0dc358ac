"""rocoforge: stress-test set generation and evaluation for image-text retrieval."""

__version__ = "0.1.0"
