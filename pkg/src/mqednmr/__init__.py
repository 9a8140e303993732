from .constants import CONSTANTS
__version__ = "0.1.0"
