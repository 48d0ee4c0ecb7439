"""Training-side tooling: builds dataset fixtures, trains the model zoo,
and exports weight bundles plus golden reference cases for the engine.

Deliberately file-coupled to the engine: everything it emits goes through
the documented JSON/plain-text formats (docs/formats.md), and everything it
consumes comes from the fixture files it wrote.
"""
