"""Abstract base class for result writers."""

import os
import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from spinmeter.core.formatter import Table


@dataclass(frozen=True)
class Plot:
    """One figure panel: y columns of a table against its x column."""

    name: str
    table: str
    x: str
    ys: tuple[str, ...]
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""


@dataclass
class ScenarioResult:
    name: str
    tables: list[Table] = field(default_factory=list)
    plots: list[Plot] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


class OutputWriter(ABC):
    """Contract every writer fulfils.

    Writers never compute; they serialise a finished ScenarioResult into
    ``output_dir`` and return the paths they wrote.
    """

    suffix: str = ""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir

    @abstractmethod
    def write(self, result: ScenarioResult) -> list[str]:
        """Write files for *result*; return their paths."""

    # --- Helpers ---

    def path_for(self, result: ScenarioResult, part: str) -> str:
        return os.path.join(self.output_dir, f"{result.name}_{part}{self.suffix}")

    def _atomic_write(self, path: str, text: str) -> None:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
