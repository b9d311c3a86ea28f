"""Utility helpers for shared cross-layer logic (keep small and dependency-light)."""
