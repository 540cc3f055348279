"""Bayesian and likelihood inference for log-location-scale lifetimes."""
