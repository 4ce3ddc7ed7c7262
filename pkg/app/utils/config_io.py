"""Sectioned key=value run files: parsing, validation and emission.

Every key is declared in ``KEY_TABLES`` with its validator, default and unit; the
README key table is generated from the same declarations by ``key_table_rows``.
"""
import configparser
import logging
from collections import namedtuple
from dataclasses import replace
from functools import partial
from pathlib import Path

from app.errors import ConfigError
from app.models.configs import BeamConfig, InseConfig, NanorodConfig, RunConfig, gaussian
from app.models.enums import CheckTarget, ModelKind
from app.utils.validators import (validate_check_target, validate_count, validate_flag,
                                  validate_float_list, validate_grading, validate_model_kind,
                                  validate_non_negative, validate_poisson_ratio, validate_positive,
                                  validate_required_fields, validate_time_schedule)

logger = logging.getLogger(__name__)

Key = namedtuple('Key', ['validator', 'default', 'unit', 'help'])


def _text(value, name):
    text = str(value).strip()
    if not text:
        return False, f"{name} must not be empty"
    return True, text


def _choice(*options):
    def validate(value, name):
        text = str(value).strip()
        if text not in options:
            return False, f"{name} must be one of {', '.join(options)}"
        return True, text
    return validate


def _pair(value, name):
    ok, numbers = validate_float_list(value, name)
    if ok and len(numbers) != 2:
        return False, f"{name} must hold exactly two numbers"
    return ok, numbers


def _counts(value, name):
    ok, numbers = validate_float_list(value, name)
    if not ok:
        return ok, numbers
    if any(n != int(n) or n < 2 for n in numbers):
        return False, f"{name} must list integers >= 2"
    return True, tuple(int(n) for n in numbers)


KEY_TABLES = {
    'run': {
        'model': Key(lambda v, _: validate_model_kind(v), None, '', 'nanorod | beam | inse | check | sweep'),
        'out_dir': Key(_text, 'runs', 'path', 'output directory'),
        'snapshots': Key(validate_time_schedule, (), 's', 'comma separated output times'),
        'seed': Key(partial(validate_count, minimum=0), 0, '', 'seed of randomized checks'),
        'threads': Key(partial(validate_count, minimum=1), 1, '', 'worker threads of sweep'),
    },
    'nanorod': {
        'E': Key(validate_positive, 1.0, 'Pa', "Young's modulus"),
        'rho': Key(validate_positive, 10.0, 'kg/m', 'density'),
        'ell': Key(validate_non_negative, 0.0, 'm', 'nonlocal length scale'),
        'n': Key(partial(validate_count, minimum=2), 100, '', 'mesh nodes'),
        'a': Key(validate_non_negative, 0.0, 'm', 'left end'),
        'b': Key(validate_positive, 1.0, 'm', 'right end'),
        'dt': Key(validate_positive, 0.1, 's', 'time step'),
        't_final': Key(validate_non_negative, 10.0, 's', 'final time'),
        'v0_center': Key(validate_non_negative, 0.3, 'm', 'center of the initial velocity bump'),
        'v0_width': Key(validate_positive, 80.0, '1/m^2', 'width of the initial velocity bump'),
    },
    'beam': {
        'model': Key(_choice('implicit', 'explicit'), 'implicit', '', 'keep or drop rotary inertia'),
        'rho': Key(validate_positive, 7.86e3, 'kg/m^3', 'mass density'),
        'E': Key(validate_positive, 2.02e11, 'Pa', "Young's modulus"),
        'nu': Key(validate_poisson_ratio, 0.3, '', "Poisson's ratio"),
        'r': Key(validate_positive, 0.05, 'm', 'cross-section radius'),
        'length': Key(validate_positive, 1.0, 'm', 'beam length'),
        'dx': Key(validate_positive, 5e-4, 'm', 'mesh size'),
        'dt0': Key(validate_positive, 1e-6, 's', 'initial time step'),
        'dt_max': Key(validate_non_negative, 0.0, 's', 'largest time step, 0 for t_final/50'),
        't_final': Key(validate_non_negative, 1e-2, 's', 'final time'),
        'tol': Key(validate_positive, 1e-8, '', 'relative local error tolerance'),
        'bump_amplitude': Key(validate_non_negative, 1e-3, 'm', 'initial bump height'),
        'bump_width': Key(validate_positive, 80.0, '1/m^2', 'initial bump width'),
        'bump_center': Key(validate_non_negative, 0.5, 'm', 'initial bump center'),
        'modes': Key(partial(validate_count, minimum=1), 10, '', 'modes in the phase-velocity table'),
    },
    'inse': {
        'rho0': Key(validate_positive, 1.0, 'kg/m^3', 'density'),
        'mu': Key(validate_non_negative, 1.0 / 625.0, 'Pa s', 'viscosity'),
        'nx': Key(partial(validate_count, minimum=2), 48, '', 'cells along x'),
        'ny': Key(partial(validate_count, minimum=2), 48, '', 'cells along y'),
        'grading': Key(validate_grading, 1.15, '', 'geometric growth away from the walls'),
        'max_ratio': Key(validate_grading, 6.0, '', 'largest to wall cell width ratio'),
        'half_width': Key(validate_positive, 1.0, 'm', 'domain is [-L, L]^2'),
        'c1': Key(_pair, (0.0, 0.1), 'm', 'center of the positive monopole'),
        'c2': Key(_pair, (0.0, -0.1), 'm', 'center of the negative monopole'),
        'r0': Key(validate_positive, 0.1, 'm', 'monopole radius'),
        'omega_e': Key(validate_non_negative, 300.0, '1/s', 'extremum vorticity'),
        'calibrate': Key(validate_flag, False, '', 'rescale omega_e so that K(0) = 2'),
        'dt': Key(validate_positive, 1.0 / 300.0, 's', 'time step'),
        't_final': Key(validate_non_negative, 0.5, 's', 'final time'),
        'profile_y': Key(_pair, (-0.6, 0.0), 'm', 'y window of the right-wall vorticity profile'),
    },
    'check': {
        'target': Key(lambda v, _: validate_check_target(v), CheckTarget.NANOROD, '',
                      'nanorod | nanorod-free | beam | beam-explicit | inse'),
        'states': Key(partial(validate_count, minimum=1), 10, '', 'random states of the inse check'),
    },
    'sweep': {
        'study': Key(_choice('condition', 'nanorod'), 'condition', '', 'what to sweep'),
        'ells': Key(validate_float_list, (0.0, 1e-3, 1e-2, 5e-2), 'm', 'nonlocal length scales'),
        'sizes': Key(_counts, (100, 500, 1000), '', 'mesh nodes of the condition study'),
    },
}

MODEL_SECTIONS = {
    ModelKind.NANOROD: ('nanorod',),
    ModelKind.BEAM: ('beam',),
    ModelKind.INSE: ('inse',),
    ModelKind.CHECK: ('check', 'nanorod', 'beam', 'inse'),
    ModelKind.SWEEP: ('sweep', 'nanorod'),
}


def _validate_section(section, raw):
    table = KEY_TABLES[section]
    unknown = sorted(set(raw) - set(table))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(f'{section}.{k}' for k in unknown)}; "
                          f"valid keys: {', '.join(table)}")
    values = {}
    for name, key in table.items():
        if name not in raw:
            values[name] = key.default
            continue
        ok, value = key.validator(raw[name], f'{section}.{name}')
        if not ok:
            raise ConfigError(value)
        values[name] = value
    return values


def parse_text(text, source='<string>'):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f'cannot parse {source}: {exc}') from exc

    unknown = sorted(set(parser.sections()) - set(KEY_TABLES))
    if unknown:
        raise ConfigError(f"unknown section(s) {', '.join(unknown)}; valid sections: {', '.join(KEY_TABLES)}")
    run = dict(parser['run']) if parser.has_section('run') else {}
    ok, message = validate_required_fields(run, ['model'])
    if not ok:
        raise ConfigError(f'{message}; the required key is run.model')

    run_values = _validate_section('run', run)
    model = run_values['model']
    params = {section: _validate_section(section, dict(parser[section]) if parser.has_section(section) else {})
              for section in MODEL_SECTIONS[model]}
    extra = [s for s in parser.sections() if s != 'run' and s not in params]
    if extra:
        raise ConfigError(f"section(s) {', '.join(extra)} do not apply to model {model.value}")
    return RunConfig(model=model, params=params, out_dir=Path(run_values['out_dir']),
                     snapshots=run_values['snapshots'], seed=run_values['seed'],
                     threads=run_values['threads'],
                     target=params['check']['target'].value if 'check' in params else '')


def parse_config(path):
    """Read and validate a run file"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f'cannot read {path}: {exc}') from exc
    return parse_text(text, source=str(path))


def default_config(model):
    """RunConfig with every key at its default"""
    model = ModelKind(model)
    return parse_text(f'[run]\nmodel = {model.value}\n')


def _format(value):
    if hasattr(value, 'value'):
        return str(value.value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (tuple, list)):
        return ', '.join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(cfg):
    """Resolved run file that parses back to ``cfg``"""
    lines = ['[run]', f'model = {cfg.model.value}', f'out_dir = {cfg.out_dir}',
             f'snapshots = {_format(cfg.snapshots)}', f'seed = {cfg.seed}', f'threads = {cfg.threads}']
    for section, values in cfg.params.items():
        lines.append('')
        lines.append(f'[{section}]')
        lines.extend(f'{name} = {_format(value)}' for name, value in values.items())
    return '\n'.join(lines) + '\n'


def apply_overrides(cfg, out_dir=None, snapshots=None, seed=None, threads=None):
    """Command-line flags take precedence over the run file"""
    changes = {}
    if out_dir is not None:
        changes['out_dir'] = Path(out_dir)
    if snapshots is not None:
        ok, times = validate_time_schedule(snapshots)
        if not ok:
            raise ConfigError(times)
        changes['snapshots'] = times
    if seed is not None:
        changes['seed'] = seed
    if threads is not None:
        if threads < 1:
            raise ConfigError('threads must be at least 1')
        changes['threads'] = threads
    return replace(cfg, **changes)


def key_table_rows():
    """(key, default, unit, help) for every declared key"""
    return [(f'{section}.{name}', _format(key.default) if key.default is not None else '(required)',
             key.unit, key.help)
            for section, table in KEY_TABLES.items() for name, key in table.items()]


def nanorod_config(values):
    return NanorodConfig(E=values['E'], rho=values['rho'], ell=values['ell'], n=values['n'],
                         a=values['a'], b=values['b'], dt=values['dt'], t_final=values['t_final'],
                         v0=partial(gaussian, center=values['v0_center'], width=values['v0_width']))


def beam_config(values):
    return BeamConfig(rho=values['rho'], E=values['E'], nu=values['nu'], r=values['r'],
                      length=values['length'], dx=values['dx'], implicit=values['model'] == 'implicit',
                      dt0=values['dt0'], dt_max=values['dt_max'] or None, t_final=values['t_final'],
                      tol=values['tol'], bump_amplitude=values['bump_amplitude'],
                      bump_width=values['bump_width'], bump_center=values['bump_center'])


def inse_config(values):
    return InseConfig(rho0=values['rho0'], mu=values['mu'], nx=values['nx'], ny=values['ny'],
                      grading=values['grading'], max_ratio=values['max_ratio'],
                      half_width=values['half_width'], c1=values['c1'], c2=values['c2'],
                      r0=values['r0'], omega_e=values['omega_e'], dt=values['dt'],
                      t_final=values['t_final'], calibrate=values['calibrate'],
                      profile_y=values['profile_y'])
