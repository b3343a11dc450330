# fields/guards.py - Parameter validation decorator for model operations
import logging
from functools import wraps

from .errors import InvalidParams
from .model_core import ModelParams, collect_violations

logger = logging.getLogger(__name__)


def require_valid_params(require_coupling: bool = False):
    """
    Decorator rejecting calls whose ModelParams break the sign conventions.
    The wrapped function must take the params as its first positional
    argument (or as the `params` keyword).
    Raises InvalidParams carrying every violated invariant.
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(*args, **kwargs):
            params = kwargs.get("params", args[0] if args else None)
            if not isinstance(params, ModelParams):
                raise InvalidParams(message=f"{f.__name__} requires ModelParams, got {type(params).__name__}")
            violations = collect_violations(params, require_coupling=require_coupling)
            if violations:
                logger.debug(f"{f.__name__} rejected params: {[str(v) for v in violations]}")
                raise InvalidParams(violations)
            return f(*args, **kwargs)
        return decorated_function
    return decorator
