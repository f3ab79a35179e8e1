"""Lock-in detected level anti-crossing spectra of a pumped electron-nuclear spin pair."""
__version__ = "0.1.0"
