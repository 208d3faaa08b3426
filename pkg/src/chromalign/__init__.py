"""chromalign: alignment analysis between text-derived color term
representations and the CIELAB perceptual color space."""

__version__ = "0.1.0"
