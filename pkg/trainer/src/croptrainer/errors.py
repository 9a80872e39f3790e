class TrainingError(Exception):
    """Training inputs or configuration are unusable."""
