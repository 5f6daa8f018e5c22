class ExportError(Exception):
    """Bad inputs or a failed export contract (missing crops, self-check divergence)."""
