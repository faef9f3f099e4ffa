"""Out-of-core sliced simulation of Sycamore-class random circuits."""

__version__ = "0.1.0"
