"""Day-ahead scheduling engine for interconnected AC microgrids.

Unit commitment with storage, adjustable loads and inter-grid exchanges,
optionally coupled to a linearized ZIP-load distribution network model.
Uncertainty in load/wind/price is propagated with an unscented transform.
"""

__version__ = "0.1.0"
