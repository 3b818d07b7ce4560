"""JSON schemas for the files and reports produced by the command line tool."""

import json
from importlib import resources


def load_schema(name: str) -> dict:
    """Load ``complex``, ``report`` or ``reports``."""
    text = resources.files(__name__).joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
