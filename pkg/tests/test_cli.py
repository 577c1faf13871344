import pytest
from sympy.polys.domains import QQ

from ncspheres.cli import (EXIT_CONFIG, EXIT_OK, SuiteConfig, _config_from_args, build_parser, parse_q,
                           run, run_pair)
from ncspheres.config import DEFAULT_CONFIG, load_config, suite_settings
from ncspheres.errors import BadParameter, ConfigError


# ============================================================================
# PARÁMETROS
# ============================================================================

def test_parse_q_exact_and_float():
    assert parse_q('1/2') == QQ(1, 2)
    assert parse_q('0.9') == pytest.approx(0.9)


@pytest.mark.parametrize('value', ['1', '0', '-1/2', '2', 'abc'])
def test_parse_q_rejects(value):
    with pytest.raises(BadParameter):
        parse_q(value)


def test_suite_config_validates_theta():
    cfg = SuiteConfig(theta='2/5').validate()
    assert cfg.theta == QQ(2, 5)


@pytest.mark.parametrize('overrides', [
    {'q': '1'},
    {'theta': 'pi'},
    {'suite': 'desconocida'},
    {'cutoff': 2},
    {'step_budget': 0},
])
def test_run_returns_config_code(overrides):
    code, report = run(SuiteConfig(**overrides), progress=False)
    assert code == EXIT_CONFIG
    assert report.results == []


def test_run_pair_bad_q():
    code, _ = run_pair(SuiteConfig(q='3/2'), progress=False)
    assert code == EXIT_CONFIG


def test_parser_uses_config_defaults():
    args = build_parser().parse_args(['verify', '--suite', 'theta', '--json'])
    cfg = _config_from_args(args, DEFAULT_CONFIG)
    assert cfg.suite == 'theta'
    assert cfg.output == 'json'
    assert cfg.theta == '1/3'
    assert cfg.cutoff == 40
    assert cfg.settings['oracle_pairs'] == 100


def test_parser_pair_overrides():
    args = build_parser().parse_args(['pair', '--q', '1/3', '--cutoff', '30'])
    cfg = _config_from_args(args, DEFAULT_CONFIG)
    assert (cfg.q, cfg.cutoff, cfg.output) == ('1/3', 30, 'text')


# ============================================================================
# CONFIG.YAML
# ============================================================================

def test_load_config_merges_defaults(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text("defaults:\n  q: '1/3'\ncyclic:\n  max_degree: 2\n", encoding='utf-8')
    config = load_config(path)
    assert config['defaults']['q'] == '1/3'
    assert config['defaults']['theta'] == '1/3'
    assert config['cyclic']['max_degree'] == 2
    assert config['cyclic']['random_chains'] == 200
    assert suite_settings(config)['max_degree'] == 2


def test_load_config_missing_explicit_path(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / 'no_existe.yaml')


@pytest.mark.parametrize('text', ["defaults: [1, 2\n", "defaults: 3\n", "- a\n- b\n"])
def test_load_config_rejects_bad_yaml(tmp_path, text):
    path = tmp_path / 'config.yaml'
    path.write_text(text, encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(path)


def test_suite_settings_rejects_bad_values():
    config = load_config()
    config['oracle']['hodge_points'] = 'muchos'
    with pytest.raises(ConfigError):
        suite_settings(config)


# ============================================================================
# EJECUCIÓN DE SUITES
# ============================================================================

def test_run_theta_suite_exits_ok():
    cfg = SuiteConfig(suite='theta', theta='1/3', settings=suite_settings(load_config()))
    code, report = run(cfg, progress=False)
    assert code == EXIT_OK
    assert report.results
    assert not any(r.failed for r in report.results)
