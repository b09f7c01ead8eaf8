"""heightlab: canonical heights, local heights and explicit lower bounds on elliptic curves."""

__version__ = "0.1.0"
