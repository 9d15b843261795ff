"""Exact bump-function calculus with the seminorms and units built on it."""

from .algebra import *  # noqa: F401,F403
from .algebra import __all__ as _alg
from .plateau import *  # noqa: F401,F403
from .plateau import __all__ as _pl
from .seminorms import *  # noqa: F401,F403
from .seminorms import __all__ as _sn
from .units import *  # noqa: F401,F403
from .units import __all__ as _un

__all__ = [*_alg, *_pl, *_sn, *_un]
