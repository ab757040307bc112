"""Reading logs and article corpora."""
