"""Capacity-distortion tradeoff toolkit for state-dependent broadcast channels with generalized feedback."""
