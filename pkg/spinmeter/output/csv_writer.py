"""CSV tables, one file per table."""

import logging

from spinmeter.core.formatter import format_table
from spinmeter.output.base import OutputWriter, ScenarioResult

log = logging.getLogger("spinmeter.output.csv")


class CsvWriter(OutputWriter):
    suffix = ".csv"

    def write(self, result: ScenarioResult) -> list[str]:
        paths = []
        for table in result.tables:
            path = self.path_for(result, table.name)
            self._atomic_write(path, format_table(table))
            log.debug(f"wrote {path} ({table.data.shape[0]} rows)")
            paths.append(path)
        return paths
