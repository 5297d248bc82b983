"""CLI commands for VertiSplit."""
