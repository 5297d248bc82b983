"""Tests for ProxMate."""

