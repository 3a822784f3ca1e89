"""Metrics, ROC/AUC, fold plans, cross-validation and report aggregation."""
