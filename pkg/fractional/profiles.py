"""Built-in function profiles addressable by name from job specs."""

import math
from typing import Union

import numpy as np

from .base import AlphaOrder, FunctionHandle, as_alpha
from .conformable import ref_cos_alpha, ref_exp_alpha, ref_sin_alpha


def power(p: float, t_max: float = math.inf) -> FunctionHandle:
    """t^p. For p < 0 the value at t = 0 is infinite and is reported as such."""
    return FunctionHandle(lambda t: np.power(t, p), t_max=t_max, name=f"t^{p:g}")


def exp_alpha(alpha: Union[AlphaOrder, float], t_max: float = math.inf) -> FunctionHandle:
    alpha = as_alpha(alpha)
    return FunctionHandle(lambda t: ref_exp_alpha(t, alpha), t_max=t_max,
                          name=f"exp_alpha[{alpha.value:g}]")


def sin_alpha(alpha: Union[AlphaOrder, float], t_max: float = math.inf) -> FunctionHandle:
    alpha = as_alpha(alpha)
    return FunctionHandle(lambda t: ref_sin_alpha(t, alpha), t_max=t_max,
                          name=f"sin_alpha[{alpha.value:g}]")


def cos_alpha(alpha: Union[AlphaOrder, float], t_max: float = math.inf) -> FunctionHandle:
    alpha = as_alpha(alpha)
    return FunctionHandle(lambda t: ref_cos_alpha(t, alpha), t_max=t_max,
                          name=f"cos_alpha[{alpha.value:g}]")


def exp_decay(rate: float = 1.0, t_max: float = math.inf) -> FunctionHandle:
    """e^(-rate x); bounded with a finite limit at infinity."""
    return FunctionHandle(lambda x: np.exp(-rate * x), t_max=t_max, name=f"exp(-{rate:g}x)")


def constant(c: float = 1.0, t_max: float = math.inf) -> FunctionHandle:
    return FunctionHandle(lambda t: np.full(np.shape(t), c) if np.ndim(t) else c,
                          t_max=t_max, name=f"const[{c:g}]")


def gaussian(center: float = 1.0, width: float = 0.25, amplitude: float = 1.0,
             t_max: float = math.inf) -> FunctionHandle:
    return FunctionHandle(
        lambda x: amplitude * np.exp(-0.5 * ((x - center) / width) ** 2),
        t_max=t_max,
        name=f"gauss[{center:g},{width:g}]",
    )
