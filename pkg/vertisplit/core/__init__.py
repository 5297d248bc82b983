"""Core modules for VertiSplit."""
