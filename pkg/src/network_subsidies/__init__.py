"""Subsidies that enforce network designs as equilibria of fair cost sharing games."""

__version__ = "0.1.0"
