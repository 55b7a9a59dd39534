import re


def natural_key(name: str):
    """Sort key placing E2 before E10."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))
