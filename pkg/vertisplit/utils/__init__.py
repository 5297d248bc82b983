"""Utility modules for VertiSplit."""
