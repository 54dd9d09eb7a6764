from .base import (
    AlphaOrder, FunctionHandle, DerivativeResult, as_alpha,
    FracSemiError, DomainError, DimensionError, InsufficientSamplesError,
    NumericalError, NonFiniteError, NoLimitError, CFLViolationError,
)
from . import profiles

# name -> (factory, parameters it accepts, parameters that are required)
PROFILES = {
    'power': (profiles.power, ('p',), ('p',)),
    'exp_alpha': (profiles.exp_alpha, ('alpha',), ('alpha',)),
    'sin_alpha': (profiles.sin_alpha, ('alpha',), ('alpha',)),
    'cos_alpha': (profiles.cos_alpha, ('alpha',), ('alpha',)),
    'exp_decay': (profiles.exp_decay, ('rate',), ()),
    'constant': (profiles.constant, ('c',), ()),
    'gaussian': (profiles.gaussian, ('center', 'width', 'amplitude'), ()),
}


def get_profile(name: str, **params) -> FunctionHandle:
    entry = PROFILES.get(name.lower())
    if not entry:
        raise DomainError(f"Unknown profile: {name}")
    factory, accepted, _ = entry
    return factory(**{key: value for key, value in params.items() if key in accepted})
