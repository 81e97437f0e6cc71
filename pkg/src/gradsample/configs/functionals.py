# -*- coding: utf-8 -*-


from typing import Literal

import msgspec

FunctionalPair = Literal["var_es", "var_var"]


class FunctionalSpec(msgspec.Struct, frozen=True):
    """
    Which pair of tail functionals carries the additive structure.

    ``levels`` are tail probabilities α; each scale factor is
    ``c_α = α / exceed_prob``. ``var_es`` takes one level, ``var_var`` two.
    """

    pair: FunctionalPair = "var_es"
    levels: tuple[float, ...] = (0.01,)
    exceed_prob: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 < self.exceed_prob < 1.0:
            err_msg = f"`exceed_prob` must lie in (0, 1), but got {self.exceed_prob}."
            raise ValueError(err_msg)
        expected = 1 if self.pair == "var_es" else 2
        if len(self.levels) != expected:
            err_msg = f"`levels` must hold {expected} value(s) for pair `{self.pair}`, but got {list(self.levels)}."
            raise ValueError(err_msg)
        if any(level <= 0.0 for level in self.levels):
            err_msg = f"`levels` must be positive, but got {list(self.levels)}."
            raise ValueError(err_msg)

    @property
    def scale_factors(self) -> tuple[float, ...]:
        return tuple(level / self.exceed_prob for level in self.levels)

    @property
    def names(self) -> tuple[str, str]:
        if self.pair == "var_es":
            return ("var", "es")
        return (f"rl_{self.levels[0]:g}", f"rl_{self.levels[1]:g}")
