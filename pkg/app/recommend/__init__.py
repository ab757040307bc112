"""Scores, matrix completion, and committee elections."""
