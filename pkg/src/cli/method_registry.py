from typing import Dict, List

from src.anoscope.registry import MethodDefinition, MethodRegistry, method_registry

CATEGORIES = ["probabilistic", "one-class", "reconstruction"]
CATEGORY_TITLES = {
    "probabilistic": "Probabilistic methods",
    "one-class": "One-class classification methods",
    "reconstruction": "Reconstruction methods",
}


def describe_dimensions(method_def: MethodDefinition) -> str:
    dims = method_def.dimensions
    return f"{dims.loss.value} / {dims.model_family.value} / {dims.feature_map.kind.value}"


def method_listing(registry: MethodRegistry = method_registry) -> List[str]:
    """Lines printed by ``anoscope list-methods``, grouped by category."""
    lines = []
    for category in CATEGORIES:
        methods: Dict[str, MethodDefinition] = registry.get_methods_by_category(category)
        if not methods:
            continue
        lines.append(f"{CATEGORY_TITLES[category]}:")
        for name, method_def in methods.items():
            labels = " [needs labels]" if method_def.needs_labels else ""
            lines.append(f"  {name:24} {method_def.description}{labels}")
            lines.append(f"  {'':24} {describe_dimensions(method_def)}")
            if method_def.parameters:
                params = ", ".join(f"{k}={v}" for k, v in method_def.parameters.items())
                lines.append(f"  {'':24} defaults: {params}")
        lines.append("")
    return lines
