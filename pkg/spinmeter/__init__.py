"""spinmeter: von Neumann spin measurements through spin-orbit coupling."""

__version__ = "0.3"
