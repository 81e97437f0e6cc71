# -*- coding: utf-8 -*-


from typing import Optional, Union

import msgspec


class LocalLinearSpec(msgspec.Struct, frozen=True, tag_field="kind", tag="local_linear"):
    covariate_index: int
    bandwidth: Optional[float] = None
    target_df: Optional[float] = None

    def __post_init__(self) -> None:
        if self.bandwidth is not None and self.target_df is not None:
            err_msg = "Set at most one of `bandwidth` and `target_df` for a local_linear smoother."
            raise ValueError(err_msg)
        if self.bandwidth is not None and self.bandwidth <= 0.0:
            err_msg = f"`bandwidth` must be positive, but got {self.bandwidth}."
            raise ValueError(err_msg)
        if self.target_df is not None and self.target_df <= 0.0:
            err_msg = f"`target_df` must be positive, but got {self.target_df}."
            raise ValueError(err_msg)


class LinearSpec(msgspec.Struct, frozen=True, tag_field="kind", tag="linear"):
    covariate_index: int


class CellFactorSpec(msgspec.Struct, frozen=True, tag_field="kind", tag="cell_factor"):
    covariate_index: int
    # extra columns crossed with `covariate_index`, labels joined by ":"
    interaction: tuple[int, ...] = ()


SmootherSpec = Union[LocalLinearSpec, LinearSpec, CellFactorSpec]
