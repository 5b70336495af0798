"""Planning toolkit for deferring capacity expansion with distributed energy resources.

The package co-optimizes investment and hourly operation of non-wire
alternatives (energy efficiency, solar PV, demand response, battery storage)
together with the year a traditional capacity-expansion project is built,
under interval uncertainty, and assesses the resulting plan by Monte Carlo
simulation of load/solar realizations.
"""

from nwaplan.timegrid import Discount, TimeGrid, discount_factor

__all__ = ["TimeGrid", "Discount", "discount_factor"]
__version__ = "0.1.0"
