"""Run summary as stable-ordered JSON."""

import logging

from spinmeter.core.formatter import format_summary
from spinmeter.output.base import OutputWriter, ScenarioResult

log = logging.getLogger("spinmeter.output.json")


class JsonWriter(OutputWriter):
    suffix = ".json"

    def write(self, result: ScenarioResult) -> list[str]:
        path = self.path_for(result, "summary")
        record = {
            "scenario": result.name,
            "summary": result.summary,
            "checks": result.checks,
            "passed": result.passed,
            "warnings": result.warnings,
        }
        self._atomic_write(path, format_summary(record))
        log.debug(f"wrote {path}")
        return [path]
