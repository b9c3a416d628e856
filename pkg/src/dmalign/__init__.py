"""Text-guided image editing driven by caption word alignments."""

__version__ = "0.1.0"
