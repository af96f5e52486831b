"""Tamagawa numbers of elliptic curves over Q: Tate's algorithm, twists, families and searches."""

__version__ = "0.1.0"
