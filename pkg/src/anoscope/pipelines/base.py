"""Base pipeline definition and the output container shared by all pipelines."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional

from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class PipelineOutput:
    """Standard container for pipeline results."""

    name: str
    """Which pipeline produced the output."""

    table: List[Dict[str, Any]] = field(default_factory=list)
    """Row-oriented result table (one dict per row, same keys in every row)."""

    metrics: Dict[str, Any] = field(default_factory=dict)
    """Headline numbers of the run."""

    metadata: Dict[str, Any] = field(default_factory=dict)
    """Run settings (seeds, sizes, chosen hyperparameters)."""

    def __getitem__(self, key: str) -> Any:
        return self.to_dict()[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self.to_dict())

    def __len__(self) -> int:
        return len(self.to_dict())

    def get(self, key: str, default: Any = None) -> Any:
        return self.to_dict().get(key, default)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class BasePipeline:
    """
    Holds the run configuration; subclasses implement ``invoke``.
    """

    name = "base"

    def __init__(self, config: Optional[Dict[str, Any]] = None, *args, **kwargs) -> None:
        self.config = dict(config or {})

    def invoke(self, *args, **kwargs) -> PipelineOutput:
        return PipelineOutput(name=self.name)
