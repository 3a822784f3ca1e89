"""Exact t-SNE for 2-D views of deep features."""
