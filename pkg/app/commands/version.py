import click

from app.utils.writers import package_versions


@click.command('version')
def version_cmd():
    """Print the versions of Python and the numerical stack."""
    for name, version in package_versions().items():
        click.echo(f'{name} {version or "not installed"}')
