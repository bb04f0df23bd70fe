"""Output writers: serialise scenario results to portable files.

Each format is a :class:`~spinmeter.output.base.OutputWriter` subclass
registered in ``WRITERS``; :func:`create_writers` builds the ones a
config asks for.

Adding a format
---------------
1. Create ``spinmeter/output/<format>_writer.py`` with a subclass of
   :class:`~spinmeter.output.base.OutputWriter`.
2. Register it in ``WRITERS`` below.
3. Add the name to ``SUPPORTED_FORMATS`` in ``spinmeter/config.py``.
"""

from spinmeter.output.base import OutputWriter
from spinmeter.output.csv_writer import CsvWriter
from spinmeter.output.json_writer import JsonWriter

# Registry of format name → writer class. svg is imported lazily so that
# matplotlib is only loaded when plots are requested.
WRITERS: dict[str, type[OutputWriter]] = {
    "csv": CsvWriter,
    "json": JsonWriter,
}


def create_writers(formats, output_dir: str) -> list[OutputWriter]:
    """Factory: one writer per requested format, in request order."""
    writers = []
    for name in formats:
        if name == "svg" and "svg" not in WRITERS:
            from spinmeter.output.svg_writer import SvgWriter
            WRITERS["svg"] = SvgWriter
        writer_class = WRITERS.get(name)
        if writer_class is None:
            raise ValueError(f"Unknown output format: {name!r}")
        writers.append(writer_class(output_dir))
    return writers
