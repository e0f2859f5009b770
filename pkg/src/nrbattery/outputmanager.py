'''
===============================================================================
Output Manager Class

Owns the output directory of a command: every table and json file is written
inside it, numbers use 17 significant digits so repeated runs are byte
identical.
===============================================================================
'''
import csv
import json
import math
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any
import numpy as np

from nrbattery import __version__


logger = logging.getLogger(__name__)


class OutputManagerError(Exception):
    """OutputManagerError: custom error class for output directory and file
    problems.
    """


def format_value(val: Any) -> str:
    if isinstance(val, (bool, np.bool_)):
        return str(int(val))
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, (float, np.floating)):
        val = float(val)
        if math.isnan(val):
            return 'nan'
        return f'{val:.17g}'
    return str(val)


def _to_json(val: Any) -> Any:
    if isinstance(val, dict):
        return {str(kk): _to_json(vv) for kk, vv in val.items()}
    if isinstance(val, (list, tuple, np.ndarray)):
        return [_to_json(vv) for vv in val]
    if isinstance(val, (np.integer, np.bool_)):
        return int(val)
    if isinstance(val, (float, np.floating)):
        val = float(val)
        return val if math.isfinite(val) else str(val)
    if isinstance(val, complex):
        return [val.real, val.imag]
    if isinstance(val, Path):
        return str(val)
    return val


class OutputManager:
    """ Manages the output directory for one command.
    """
    def __init__(self, out_dir: Path, create: bool = True) -> None:
        """__init__

        Args:
            out_dir (Path): directory all files are written to.
            create (bool, optional): create the directory (and parents) if it
                does not exist. Defaults to True.

        Raises:
            OutputManagerError: the directory does not exist and create is
                False, or it cannot be created.
        """
        self._out_dir = Path(out_dir)
        if not self._out_dir.is_dir():
            if not create:
                raise OutputManagerError(f'Output directory does not exist: {self._out_dir}.')
            try:
                self._out_dir.mkdir(parents=True)
            except OSError as err:
                raise OutputManagerError(f'Cannot create output directory '
                                         + f'{self._out_dir}: {err}') from err

        self._written = list([])

    def get_out_dir(self) -> Path:
        return self._out_dir

    def get_written(self) -> list[Path]:
        return list(self._written)

    def get_path(self, file_name: str) -> Path:
        """get_path: path of a file directly inside the output directory.

        Raises:
            OutputManagerError: the name is not a plain file name.
        """
        name = Path(file_name)
        if name.is_absolute() or len(name.parts) != 1 or name.name in ('.', '..'):
            raise OutputManagerError(f'Output file name must be a plain file name, got "{file_name}".')
        return self._out_dir / name

    def _record(self, path: Path) -> Path:
        self._written.append(path)
        logger.info('Wrote %s', path)
        return path

    def write_table(self, file_name: str, columns: dict[str, Any]) -> Path:
        """write_table: writes equal length columns as CSV with a header row.

        Raises:
            OutputManagerError: the columns have different lengths.
        """
        lengths = {len(vv) for vv in columns.values()}
        if len(lengths) > 1:
            raise OutputManagerError(f'Table columns have different lengths: {sorted(lengths)}.')

        path = self.get_path(file_name)
        n_rows = lengths.pop() if lengths else 0
        cols = list(columns.values())
        try:
            with open(path, 'w', encoding='utf-8', newline='') as out_file:
                writer = csv.writer(out_file, lineterminator='\n')
                writer.writerow(list(columns.keys()))
                for ii in range(n_rows):
                    writer.writerow([format_value(cc[ii]) for cc in cols])
        except OSError as err:
            raise OutputManagerError(f'Cannot write {path}: {err}') from err

        return self._record(path)

    def write_json(self, file_name: str, data: dict) -> Path:
        path = self.get_path(file_name)
        try:
            with open(path, 'w', encoding='utf-8') as out_file:
                json.dump(_to_json(data), out_file, indent=4)
        except OSError as err:
            raise OutputManagerError(f'Cannot write {path}: {err}') from err
        return self._record(path)

    def write_meta(self, stem: str, meta: dict) -> Path:
        """write_meta: writes '<stem>.meta.json' holding the given metadata,
        the package version and a creation timestamp. The timestamp is the
        only run dependent content of any output file.
        """
        full_meta = {'version': __version__}
        full_meta.update(meta)
        full_meta['timestamp'] = datetime.now(timezone.utc).isoformat()
        return self.write_json(f'{stem}.meta.json', full_meta)


def read_table(path: Path) -> dict[str, list[str]]:
    """read_table: reads a CSV written by write_table into string columns.

    Raises:
        FileNotFoundError: the file does not exist.
    """
    if not path.is_file():
        raise FileNotFoundError(f'Table not found at: {path}.')

    with open(path, 'r', encoding='utf-8', newline='') as in_file:
        reader = csv.reader(in_file)
        header = next(reader)
        columns = {hh: list([]) for hh in header}
        for row in reader:
            for hh, vv in zip(header, row):
                columns[hh].append(vv)
    return columns
