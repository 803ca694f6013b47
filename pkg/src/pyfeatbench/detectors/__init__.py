"""Keypoint detector implementations."""
