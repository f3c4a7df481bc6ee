"""Access to the bundled .arch fixture models."""

from __future__ import annotations

from importlib import resources

from .model import ArchitectureModel, ArchsteerError, load_model


def fixture_names() -> list[str]:
    root = resources.files("archsteer") / "fixtures"
    return sorted(p.name[: -len(".arch")] for p in root.iterdir() if p.name.endswith(".arch"))


def fixture_text(name: str) -> str:
    path = resources.files("archsteer") / "fixtures" / f"{name}.arch"
    if not path.is_file():
        raise ArchsteerError(f"unknown fixture '{name}' (have: {', '.join(fixture_names())})")
    return path.read_text(encoding="utf-8")


def load_fixture(name: str) -> ArchitectureModel:
    return load_model(fixture_text(name))
