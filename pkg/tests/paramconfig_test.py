'''
==============================================================================
TEST: ParamConfig

Paths are relative to the repository root, run pytest from there.
==============================================================================
'''
from pathlib import Path
import pytest
from nrbattery.sysparams import SystemParams, baseline
from nrbattery.paramconfig import ParamConfig, ParamConfigError, save_config, param_keys
import tests.batterychecker as bc


def test_param_keys() -> None:
    keys = param_keys()
    assert keys[0] == 'delta_a'
    assert 'gamma_m' in keys
    assert len(keys) == 13


def test_blank_config_gives_defaults() -> None:
    config = ParamConfig()
    assert config.get_params() == SystemParams()
    assert config.get_source() == 'defaults'


def test_read_baseline_config() -> None:
    config = ParamConfig().read_config(bc.BASELINE_CONFIG)
    assert config.get_params() == baseline()
    assert config.get_vars()['gamma_m'] == 20.0
    assert config.get_source() == str(bc.BASELINE_CONFIG)


def test_read_config_missing() -> None:
    with pytest.raises(ParamConfigError) as err_info:
        ParamConfig().read_config(Path('tests/config/nope.cfg'))

    (msg,) = err_info.value.args
    assert msg == 'Parameter config file does not exist at: tests/config/nope.cfg.'


@pytest.mark.parametrize(
    ('file_name', 'expected', 'line_num'),
    (
        ('broken-key.cfg', 'Line 2: Unknown key "g_c".', 2),
        ('broken-value.cfg', 'Line 3: Value "fast" for key "kappa_a" is not a decimal number.', 3),
        ('duplicate-key.cfg', 'Line 2: Duplicate key "j".', 2),
        ('malformed.cfg', 'Line 3: Expected "key = value", got "gamma_m 20".', 3),
    )
)
def test_read_config_err(file_name: str, expected: str, line_num: int) -> None:
    with pytest.raises(ParamConfigError) as err_info:
        ParamConfig().read_config(bc.CONFIG_PATH / file_name)

    (msg,) = err_info.value.args
    assert msg == expected
    assert err_info.value.line_num == line_num


def test_read_config_invalid_params() -> None:
    config = ParamConfig().read_config(bc.CONFIG_PATH / 'negative-rate.cfg')
    with pytest.raises(ParamConfigError) as err_info:
        config.get_params()

    (msg,) = err_info.value.args
    assert msg == ('Invalid parameters from tests/config/negative-rate.cfg: '
                   + 'Parameter kappa_b must be >= 0, got -0.003.')


def test_update_vars_strings() -> None:
    params = ParamConfig(baseline()).update_vars(['j=0.05', ' kappa_b = 0.03']).get_params()
    assert params.j == 0.05
    assert params.kappa_b == 0.03
    assert params.epsilon == 0.1


def test_update_vars_dict_after_file() -> None:
    config = ParamConfig().read_config(bc.BASELINE_CONFIG)
    params = config.update_vars({'epsilon': 0.2}).get_params()
    assert params.epsilon == 0.2
    assert params.j == 0.02


@pytest.mark.parametrize(
    ('overrides', 'expected'),
    (
        (['j'], 'Override "j" must be key=value.'),
        (['omega_c=1'], 'Unknown key "omega_c" in override.'),
        (['j=abc'], 'Value "abc" for key "j" is not a decimal number.'),
    )
)
def test_update_vars_err(overrides: list[str], expected: str) -> None:
    with pytest.raises(ParamConfigError) as err_info:
        ParamConfig().update_vars(overrides)

    (msg,) = err_info.value.args
    assert msg == expected


def test_save_config_round_trip(tmp_path: Path) -> None:
    save_path = tmp_path / 'saved.cfg'
    save_config(baseline(), save_path)

    assert ParamConfig().read_config(save_path).get_params() == baseline()


def test_save_config_err() -> None:
    with pytest.raises(ParamConfigError) as err_info:
        save_config(baseline(), Path('no-dir/saved.cfg'))

    (msg,) = err_info.value.args
    assert msg == 'Parent path to save config file does not exist.'
