from __future__ import annotations

from dataclasses import dataclass

from ..layering import Layer


@dataclass(frozen=True)
class RenderOptions:
    layer_filter: Layer | None = None
    include_attributes: bool = False
    title: str | None = None
