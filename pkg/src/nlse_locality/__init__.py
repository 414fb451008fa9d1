"""Nonlocality tests for nonlinear Schroedinger equations."""
