"""SVG line plots, one file per figure panel.

matplotlib runs on the Agg backend with a fixed hash salt and no date
metadata, so identical data gives byte-identical files.
"""

import io
import logging

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from spinmeter.output.base import OutputWriter, ScenarioResult  # noqa: E402

log = logging.getLogger("spinmeter.output.svg")

HASH_SALT = "spinmeter"


class SvgWriter(OutputWriter):
    suffix = ".svg"

    def write(self, result: ScenarioResult) -> list[str]:
        paths = []
        with matplotlib.rc_context({"svg.hashsalt": HASH_SALT, "svg.fonttype": "none"}):
            for plot in result.plots:
                table = result.table(plot.table)
                fig, ax = plt.subplots(figsize=(6, 4))
                x = table.column(plot.x)
                for name in plot.ys:
                    ax.plot(x, table.column(name), label=name, linewidth=1.2)
                ax.set_xlabel(plot.xlabel or plot.x)
                ax.set_ylabel(plot.ylabel)
                if plot.title:
                    ax.set_title(plot.title)
                if len(plot.ys) > 1:
                    ax.legend(fontsize="small")
                buf = io.StringIO()
                fig.savefig(buf, format="svg", metadata={"Date": None})
                plt.close(fig)

                path = self.path_for(result, plot.name)
                self._atomic_write(path, buf.getvalue())
                log.debug(f"wrote {path}")
                paths.append(path)
        return paths
