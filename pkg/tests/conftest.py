"""Shared pytest configuration; also anchors sys.path for `import oracles`."""
