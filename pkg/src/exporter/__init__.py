"""Plain-text exporters for reports, ROC points and embeddings."""
