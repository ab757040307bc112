"""Voting-rule news recommendation with user-satisfaction and bias audits."""
