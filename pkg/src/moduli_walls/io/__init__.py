"""Serialization and command-line front end."""
