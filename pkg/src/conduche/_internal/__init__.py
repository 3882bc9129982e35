"""Internal helpers for the conduche package."""
