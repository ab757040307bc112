"""Seed lexicons, fairness metrics, and the results table."""
