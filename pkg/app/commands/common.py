from contextlib import contextmanager
from dataclasses import replace

import click

from app.errors import ConfigError, KitError
from app.extensions import log_setup
from app.models.enums import ModelKind
from app.utils.config_io import apply_overrides, default_config, emit_config, parse_config
from app.utils.writers import write_error_log, write_resolved_config, write_versions

_RUN_OPTIONS = (
    click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
                 help='Run file (sectioned key=value).'),
    click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory.'),
    click.option('--snapshots', default=None, help='Comma separated output times "t1,t2,...".'),
    click.option('--threads', type=int, default=None, help='Worker threads.'),
    click.option('--seed', type=int, default=None, help='Seed of randomized checks.'),
)


def run_options(command):
    """Flags shared by every run command"""
    for option in reversed(_RUN_OPTIONS):
        command = option(command)
    return command


def load_run_config(model, settings, config_path=None, out=None, snapshots=None, seed=None, threads=None):
    """Run file (or profile defaults) with command-line overrides applied"""
    model = ModelKind(model)
    path = config_path or settings.RUN_CONFIG
    if path:
        cfg = parse_config(path)
        if cfg.model is not model:
            raise ConfigError(f"run file declares model '{cfg.model.value}', expected '{model.value}'")
    else:
        cfg = default_config(model)
        if 'inse' in cfg.params and settings.INSE_DEFAULTS:
            params = dict(cfg.params)
            params['inse'] = {**params['inse'], **settings.INSE_DEFAULTS}
            cfg = replace(cfg, params=params)
    return apply_overrides(cfg, out_dir=out, snapshots=snapshots, seed=seed, threads=threads)


@contextmanager
def run_directory(cfg):
    """Create the run directory with its resolved config and versions manifest.

    Kit errors raised inside the block are written to ``error.log`` before they
    propagate to the exit-code handler.
    """
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_resolved_config(out, emit_config(cfg))
    write_versions(out)
    log_setup.attach(out)
    try:
        yield out
    except KitError as exc:
        write_error_log(out, exc)
        raise
    finally:
        log_setup.detach()


def time_label(t):
    return f'{t:.6g}'
