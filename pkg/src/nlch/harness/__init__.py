"""Configuration, persistence and experiment campaigns behind the ``nlch`` CLI."""
