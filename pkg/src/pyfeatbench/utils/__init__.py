"""Helper utilities: errors, logging, enum mixins and general helpers."""
