import logging
import os

import click

from config import config
from app.errors import ConfigError, KitError
from app.extensions import log_setup, progress
from app.models.enums import ExitCode

logger = logging.getLogger(__name__)


def create_app(config_name='default'):
    """Application factory pattern"""
    settings = config[config_name]
    settings.init_app(settings)

    # Initialize extensions
    log_setup.init_app(settings)
    progress.init_app(settings)

    cli = click.Group(name='phkit', context_settings={'obj': settings},
                      help='Structure-preserving simulations of port-Hamiltonian systems.')

    # Register commands
    from app.commands import (
        nanorod_cmd, beam_cmd, inse_cmd, check_cmd, sweep_cmd, version_cmd
    )

    cli.add_command(nanorod_cmd)
    cli.add_command(beam_cmd)
    cli.add_command(inse_cmd)
    cli.add_command(check_cmd)
    cli.add_command(sweep_cmd)
    cli.add_command(version_cmd)
    return cli


def handle_error(error):
    """Map an exception raised by a command to its exit code"""
    if isinstance(error, KitError):
        logger.error('%s: %s', type(error).__name__, error)
        return error.exit_code
    if isinstance(error, click.ClickException):
        error.show()
        return ConfigError.exit_code
    if isinstance(error, click.exceptions.Abort):
        return ConfigError.exit_code
    logger.exception('unexpected failure')
    return ExitCode.SOLVER_FAILURE


def main(argv=None, config_name=None):
    """Run the command line and return its exit code"""
    cli = create_app(config_name or os.environ.get('PHKIT_PROFILE', 'default'))
    try:
        result = cli.main(args=argv, prog_name='phkit', standalone_mode=False)
    except Exception as error:
        return int(handle_error(error))
    return int(result) if isinstance(result, int) else int(ExitCode.OK)
