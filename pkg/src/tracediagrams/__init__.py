"""Exact evaluation of trace diagrams."""
