from os import path
from textwrap import dedent

from elliptic_sos import settings as es_settings
from elliptic_sos.utils.settings import DEFAULTS, SETTING_PREFIX


def get_updated_settings(additional_config):
    file_name = path.join(path.dirname(es_settings.__file__), 'dynamic_settings.py')
    code_to_compile = ''
    with open(file_name, 'r') as to_compile:
        code_to_compile = to_compile.read()

    code = f'{additional_config}\n{code_to_compile}'

    updated_settings = {}
    compiled_code = compile(code, file_name, 'exec')  # noqa: WPS421
    exec(compiled_code, updated_settings)  # noqa: S102, WPS421
    return updated_settings


def test_defaults_match_the_settings_helper():
    updated_settings = get_updated_settings('')
    for name, default in DEFAULTS.items():
        assert updated_settings[f'{SETTING_PREFIX}{name}'] == default, name


def test_existing_settings_are_kept():
    additional_config = dedent(
        '''
        ELLIPTIC_SOS_MAX_L = 4
        ELLIPTIC_SOS_CONTOUR_NODES = 256
    '''
    )
    updated_settings = get_updated_settings(additional_config)
    assert updated_settings['ELLIPTIC_SOS_MAX_L'] == 4
    assert updated_settings['ELLIPTIC_SOS_CONTOUR_NODES'] == 256
    assert updated_settings['ELLIPTIC_SOS_CONTOUR_MAX_L'] == 3


def test_contour_feature_defaults_on():
    additional_config = dedent(
        '''
        ELLIPTIC_SOS_FEATURES = {'OTHER': False}
    '''
    )
    updated_settings = get_updated_settings(additional_config)
    assert updated_settings['ELLIPTIC_SOS_FEATURES'] == {'OTHER': False, 'CONTOUR': True}


def test_contour_feature_disabled():
    additional_config = dedent(
        '''
        ELLIPTIC_SOS_FEATURES = {'CONTOUR': False}
    '''
    )
    updated_settings = get_updated_settings(additional_config)
    assert updated_settings['ELLIPTIC_SOS_FEATURES']['CONTOUR'] is False
