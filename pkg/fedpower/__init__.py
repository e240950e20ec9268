
__version__ = '0.1.0'

from fedpower.exceptions import throw  # noqa: E402,F401
