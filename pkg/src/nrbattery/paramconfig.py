'''
===============================================================================
Parameter Config Class

Reads and writes flat key-value parameter files:

    # comment
    g_a = 0.63245553203367588   # trailing comments are allowed
    gamma_m = 20

Keys are SystemParams field names, values are decimal numbers.
===============================================================================
'''
from dataclasses import fields, replace
from pathlib import Path
from typing import Self

from nrbattery.sysparams import SystemParams, ParamsError


class ParamConfigError(Exception):
    """ParamConfigError: custom error class for flagging errors in parameter
    config files and overrides.
    """
    def __init__(self, message: str, line_num: int | None = None) -> None:
        if line_num is not None:
            message = f'Line {line_num}: {message}'
        super().__init__(message)
        self.line_num = line_num


def param_keys() -> list[str]:
    return [ff.name for ff in fields(SystemParams)]


def _parse_value(key: str, val_str: str, line_num: int | None) -> float:
    try:
        return float(val_str)
    except ValueError as err:
        raise ParamConfigError(f'Value "{val_str}" for key "{key}" is not a '
                               + 'decimal number.', line_num) from err


def _split_line(line: str, comment_char: str = '#') -> tuple[str, str] | None:
    """_split_line: strips a trailing comment and splits 'key = value'.
    Returns None for blank or comment only lines."""
    content = line.split(comment_char, 1)[0].strip()
    if not content:
        return None
    if content.find('=') < 0:
        raise ValueError(content)
    (key, val) = content.split('=', 1)
    return (key.strip(), val.strip())


class ParamConfig:
    """ Parameter configuration built from a preset or base parameter set with
    values read from key-value files or command line overrides layered on top.
    """
    def __init__(self, base: SystemParams | None = None) -> None:
        self._base = SystemParams() if base is None else base
        self._values = dict({})
        self._source = 'defaults'

    def read_config(self, config_path: Path) -> Self:
        """read_config: reads a key-value parameter file.

        Args:
            config_path (Path): path to the parameter file.

        Raises:
            ParamConfigError: missing file, malformed line, unknown or
                duplicate key, or a non numeric value. The line number is
                included in the message.

        Returns:
            Self: allows ParamConfig().read_config(path).
        """
        if not config_path.is_file():
            raise ParamConfigError(f'Parameter config file does not exist at: {config_path}.')

        with open(config_path, 'r', encoding='utf-8') as cf:
            lines = cf.readlines()

        known = param_keys()
        values = dict({})
        for ii, ll in enumerate(lines):
            line_num = ii + 1
            try:
                split = _split_line(ll)
            except ValueError as err:
                raise ParamConfigError(f'Expected "key = value", got "{err}".',
                                       line_num) from err
            if split is None:
                continue

            (key, val_str) = split
            if key not in known:
                raise ParamConfigError(f'Unknown key "{key}".', line_num)
            if key in values:
                raise ParamConfigError(f'Duplicate key "{key}".', line_num)
            values[key] = _parse_value(key, val_str, line_num)

        self._values.update(values)
        self._source = str(config_path)
        return self

    def update_vars(self, overrides: list[str] | dict[str, float]) -> Self:
        """update_vars: applies overrides given as 'key=value' strings or as a
        dictionary.

        Raises:
            ParamConfigError: malformed override, unknown key or non numeric
                value.
        """
        if isinstance(overrides, dict):
            pairs = [(kk, str(vv)) for kk, vv in overrides.items()]
        else:
            pairs = list([])
            for oo in overrides:
                if oo.find('=') < 0:
                    raise ParamConfigError(f'Override "{oo}" must be key=value.')
                (key, val) = oo.split('=', 1)
                pairs.append((key.strip(), val.strip()))

        known = param_keys()
        for (key, val_str) in pairs:
            if key not in known:
                raise ParamConfigError(f'Unknown key "{key}" in override.')
            self._values[key] = _parse_value(key, val_str, None)

        return self

    def get_params(self) -> SystemParams:
        """get_params: base parameters with all read values applied.

        Raises:
            ParamConfigError: the values violate a parameter invariant.
        """
        try:
            return replace(self._base, **self._values)
        except ParamsError as err:
            raise ParamConfigError(f'Invalid parameters from {self._source}: {err}') from err

    def get_vars(self) -> dict[str, float]:
        return dict(self._values)

    def get_source(self) -> str:
        return self._source


def save_config(params: SystemParams, config_path: Path) -> None:
    """save_config: writes every field as 'key = value' with 17 significant
    digits.

    Raises:
        ParamConfigError: the parent directory does not exist.
    """
    if not config_path.parent.is_dir():
        raise ParamConfigError('Parent path to save config file does not exist.')

    lines = [f'{kk} = {vv:.17g}\n' for kk, vv in params.to_dict().items()]
    with open(config_path, 'w', encoding='utf-8') as cf:
        cf.writelines(lines)
