# -*- coding: utf-8 -*-


import functools
from collections.abc import Mapping
from pathlib import Path
from typing import Union

from ruamel import yaml

from .path import require_file, resolve_path


@functools.cache
def _yaml_parser() -> yaml.YAML:
    # * uses Python modules
    parser = yaml.YAML(typ="safe", pure=True)
    # * controls the dumping style
    parser.default_flow_style = False
    parser.sort_base_mapping_type_on_output = False  # type: ignore[assignment]
    parser.indent(mapping=2, sequence=4, offset=2)
    return parser


def load_yaml(path: Union[str, Path]) -> dict[str, object]:
    with open(require_file(path), "rb") as fobj:
        content = _yaml_parser().load(fobj.read())
    if content is None:
        return {}
    if not isinstance(content, dict):
        err_msg = f"Config file '{path}' must hold a mapping, but found `{type(content).__name__}`."
        raise TypeError(err_msg)
    return content


def dump_yaml(data: Mapping[str, object], path: Union[str, Path]) -> Path:
    pobj = resolve_path(path)
    with open(pobj, "w", encoding="utf-8") as fobj:
        _yaml_parser().dump(dict(data), fobj)
    return pobj
