#!/usr/bin/env python3
"""
Report Writer
Tabular results as CSV (pandas) and nested results as JSON, to a file or stdout.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'


def round_floats(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and round floats to 12 significant digits"""
    if isinstance(obj, dict):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not np.isfinite(value):
            return None
        return float(FLOAT_FORMAT % value)
    return obj


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        f.write(text)
    logger.info(f"Wrote {path}")


def write_table(rows: List[Dict], path: Optional[Path] = None, fmt: str = 'csv') -> None:
    """
    Write rows (list of flat dicts with identical keys) as CSV or a JSON array

    Args:
        rows: Table rows
        path: Output file, stdout if None
        fmt: 'csv' or 'json'
    """
    if fmt == 'json':
        write_document(rows, path)
        return
    # Konvertera till DataFrame för enklare hantering
    df = pd.DataFrame(rows)
    _emit(df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n'), path)


def write_document(document: Any, path: Optional[Path] = None) -> None:
    """Write any nested result as indented JSON"""
    _emit(json.dumps(round_floats(document), indent=2) + '\n', path)
