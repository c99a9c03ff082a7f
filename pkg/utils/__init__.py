"""Sensor clients, datasets, caches and result files."""
