"""
TradeRisk. Systemic trade-risk indicators on multiplex trade networks
"""
from importlib_metadata import version

__version__ = version("traderisk")
