"""Generic Kripke models K_n^d and the finite free Heyting algebras they carry."""

from .core import *  # noqa: F401,F403
from .core import __all__

__version__ = "0.1.0"
