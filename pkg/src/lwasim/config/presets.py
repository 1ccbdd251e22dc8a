"""Built-in scenarios shipped as commented YAML files."""

from __future__ import annotations

from pathlib import Path

from lwasim.config.settings import ConfigError, Scenario

PRESETS_DIR = Path(__file__).parent / "presets"
PRESET_PREFIX = "presets:"


def preset_path(name: str) -> Path:
    path = PRESETS_DIR / f"{name}.yaml"
    if not path.is_file():
        known = ", ".join(name for name, _ in list_presets())
        raise ConfigError("", f"Unknown preset: {name}. Available: {known}")
    return path


def list_presets() -> list[tuple[str, str]]:
    """(name, one-line description) for every packaged preset, sorted."""
    presets: list[tuple[str, str]] = []
    for path in sorted(PRESETS_DIR.glob("*.yaml")):
        description = ""
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.startswith("#"):
                    description = line.lstrip("#").strip()
                    break
        presets.append((path.stem, description))
    return presets


def resolve_scenario(ref: str) -> Scenario:
    """Load ``presets:<name>`` from the package, anything else from disk."""
    if ref.startswith(PRESET_PREFIX):
        return Scenario.load(preset_path(ref[len(PRESET_PREFIX):]))
    return Scenario.load(Path(ref))
