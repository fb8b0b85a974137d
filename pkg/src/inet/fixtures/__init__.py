"""Bundled example nets plus a generator for benchmark inputs."""

from pathlib import Path

_HERE = Path(__file__).resolve().parent


def available():
    """Names of the bundled `.inet` files."""
    return sorted(p.stem for p in _HERE.glob("*.inet"))


def fixture_path(name: str) -> Path:
    path = _HERE / f"{name}.inet"
    if not path.is_file():
        raise FileNotFoundError(
            f"no bundled fixture {name!r}; available: {', '.join(available())}"
        )
    return path


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def delegation_chain(depth: int) -> str:
    """Source for a net whose needed-mode run is exactly `depth` delegations.

    A unary agent is stacked `depth` deep over a demanded leaf; the root
    meets an inert agent with no rule, so the whole run is demand
    propagation followed by one observable terminal.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    body = "U(" * depth + "!P" + ")" * depth
    return (
        "agent U/1\n"
        "agent P/0\n"
        "agent T/0\n"
        f"net chain {{ {body} = T; }}\n"
    )
