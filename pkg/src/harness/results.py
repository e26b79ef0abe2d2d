"""
Result emission: CSV with a fixed column order, or JSON lines.
"""
import json
import logging
from pathlib import Path
from typing import Iterable

import pandas as pd

from models.experiment_models import OutputFormat
from models.result_models import RESULT_COLUMNS, ResultRecord

logger = logging.getLogger(__name__)


def emit_results(records: Iterable[ResultRecord], path, fmt=OutputFormat.CSV) -> Path:
    """Write records; floats keep 17 significant digits."""
    fmt = OutputFormat(fmt)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [record.to_dict() for record in records]

    if fmt is OutputFormat.CSV:
        frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
        frame.to_csv(path, index=False, float_format="%.17g", na_rep="")
    else:
        with path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    logger.info("Wrote %d records to %s", len(rows), path)
    return path


def load_results(path, fmt=OutputFormat.CSV) -> pd.DataFrame:
    """Read a results file back with exact float parsing."""
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.CSV:
        return pd.read_csv(path, float_precision="round_trip")
    return pd.read_json(path, lines=True, precise_float=True)
