"""Benchmark networks with multiple coexisting planted partitions."""

__version__ = "0.1.0"
