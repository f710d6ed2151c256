"""Monte-Carlo simulation of cold atoms falling past a microtoroidal resonator."""

__version__ = "0.1.0"
