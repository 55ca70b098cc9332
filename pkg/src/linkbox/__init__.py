"""Infobox generation from the linked entities of knowledge-graph articles."""

__version__ = "0.1.0"
