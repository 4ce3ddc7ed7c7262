import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import click

from app.commands.common import load_run_config, run_directory, run_options
from app.numerics.diagnostics import balance_summary, condition_sweep, table_rows
from app.simulations import nanorod
from app.utils.config_io import nanorod_config
from app.utils.writers import write_rows_csv, write_summary

logger = logging.getLogger(__name__)

CONDITION_COLUMNS = ('ell', 'N', 'kappa', 'lambda_min', 'lambda_max')
DRIFT_COLUMNS = ('ell', 'max_drift', 'final_drift', 'max_residual')


def _nanorod_drift(base, ell):
    _, series, _ = nanorod.run(replace(base, ell=ell))
    report = balance_summary(series, energy='H_rob')
    return {'ell': ell, 'max_drift': report.max_drift, 'final_drift': report.final_drift,
            'max_residual': report.max_residual}


@click.command('sweep')
@run_options
@click.pass_obj
def sweep_cmd(settings, config_path, out, snapshots, threads, seed):
    """Independent runs over nonlocal length scales (condition numbers or nanorod drifts)."""
    cfg = load_run_config('sweep', settings, config_path, out, snapshots, seed, threads)
    values = cfg.params['sweep']
    ells = values['ells']
    with run_directory(cfg) as out_dir, ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        if values['study'] == 'condition':
            jobs = [pool.submit(condition_sweep, ells, [n], seed=cfg.seed) for n in values['sizes']]
            records = [row for job in jobs for row in job.result()]
            columns = CONDITION_COLUMNS
        else:
            base = nanorod_config(cfg.params['nanorod'])
            records = list(pool.map(lambda ell: _nanorod_drift(base, ell), ells))
            columns = DRIFT_COLUMNS
        write_rows_csv(out_dir / 'sweep.csv', columns, table_rows(records, columns))
        write_summary(out_dir, {'study': values['study'], 'runs': len(records)})
    click.echo(f"sweep {values['study']}: {len(records)} run(s) -> {out_dir}")
