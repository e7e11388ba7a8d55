"""q-convolution, q-middle convolution and q-deformed additions for q-difference systems."""
__version__ = "0.1.0"
