import functools
import inspect
import logging
from typing import Callable, Union

import numpy as np
from scipy import linalg

from .core import logger, _log_event
from .errors import NotPositiveDefiniteError


def _lambda_min(value) -> float:
    return float(linalg.eigvalsh(value.entries, subset_by_index=[0, 0])[0])


def _iter_tensors(name, value):
    if hasattr(value, "entries"):
        yield name, value
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            if hasattr(item, "entries"):
                yield f"{name}[{i}]", item


def positive_definite(*names: str, on_violation: Union[str, Callable] = "raise"):
    """
    Decorator to enforce positive-definite tensor arguments.

    :param names: Parameter names to check. Each may hold a tensor or a
                  sequence of tensors. With no names every tensor-valued
                  argument is checked.
    :param on_violation: Behavior when an argument is not PD.
                    - "raise" (default): Raise NotPositiveDefiniteError
                    - "log": Log a warning and proceed (audit mode)
                    - callable: Function(func_name, argument, lambda_min) -> bool
                                Returns True to proceed, False to raise.
    """
    def decorator(func):
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            bound = signature.bind(*args, **kwargs)
            checked = names or tuple(bound.arguments)

            for name in checked:
                if name not in bound.arguments:
                    continue
                for label, tensor in _iter_tensors(name, bound.arguments[name]):
                    lam = _lambda_min(tensor)
                    if lam > 0:
                        continue

                    error_msg = (
                        f"'{func.__name__}' requires a positive-definite '{label}'; "
                        f"smallest eigenvalue is {lam:.6g}."
                    )

                    if on_violation == "log":
                        _log_event("pd_violation", logging.WARNING, function=func.__name__,
                                   argument=label, lambda_min=lam)
                        continue

                    if callable(on_violation):
                        if on_violation(func.__name__, label, lam):
                            _log_event("pd_violation_accepted", logging.INFO, function=func.__name__,
                                       argument=label, lambda_min=lam)
                            continue
                        raise NotPositiveDefiniteError(f"Rejected by violation policy: {error_msg}")

                    logger.debug(error_msg)
                    raise NotPositiveDefiniteError(error_msg)

            return func(*args, **kwargs)

        return wrapper
    return decorator


def require_positive_definite(tensor, label: str = "tensor") -> float:
    """Raise NotPositiveDefiniteError unless ``tensor`` is PD; return its smallest eigenvalue."""
    lam = _lambda_min(tensor)
    if not np.isfinite(lam) or lam <= 0:
        raise NotPositiveDefiniteError(f"{label} is not positive definite; smallest eigenvalue is {lam:.6g}.")
    return lam
