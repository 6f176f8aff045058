from typing import Any

from pydantic import BaseModel


def conform_key(key: str):
    """
    All configuration keys are matched in lower case with underscores, so `power_W`, `Power-W` and `power_w` name
    the same field.
    """
    return key.lower().replace("-", "_")


def conform_keys(data: Any) -> Any:
    """Apply `conform_key` to every key of a nested mapping."""
    if isinstance(data, dict):
        return {conform_key(key) if isinstance(key, str) else key: conform_keys(value) for key, value in data.items()}
    return data


def fuzzy_lookup(obj: BaseModel | dict, key: str, raise_on_missing: bool = False) -> Any:
    """
    Look up a key in a model or dict using a case insensitive match that also allows underscores to be used
    in place of dashes (and vice-versa)
    """

    d = obj if isinstance(obj, dict) else obj.model_dump()
    normalized_dict = {conform_key(k): v for k, v in d.items()}
    if raise_on_missing:
        return normalized_dict[conform_key(key)]
    return normalized_dict.get(conform_key(key))


def set_path(data: dict, path: str, value: Any) -> dict:
    """
    Return a copy of the nested mapping `data` with the dotted `path` set to `value`. Every segment of the path
    must already exist; segments are matched with `fuzzy_lookup`.
    """
    head, _, rest = path.partition(".")
    key = conform_key(head)
    copied = {conform_key(k): v for k, v in data.items()}
    current = fuzzy_lookup(copied, key, raise_on_missing=True)
    if rest:
        if not isinstance(current, dict):
            raise KeyError(f"`{head}` is not a section")
        copied[key] = set_path(current, rest, value)
    else:
        copied[key] = value
    return copied
