# -*- coding: utf-8 -*-


from typing import Any

import msgspec


def get_struct_tag(obj: msgspec.Struct) -> str | None:
    return getattr(msgspec.inspect.type_info(obj.__class__), "tag", None)


def struct_to_dict(obj: msgspec.Struct) -> dict[str, Any]:
    """Field values keyed by their encoded names (``lam`` -> ``lambda``)."""
    values: dict[str, Any] = {}
    for fld_info in msgspec.structs.fields(obj):
        values[fld_info.encode_name] = getattr(obj, fld_info.name)
    return values
