"""Non-interactive quantum XOR oblivious transfer from symmetric pure states."""

__version__ = "0.1.0"
