import logging

import click
import numpy as np

from app.commands.common import load_run_config, run_directory, run_options
from app.errors import StructureError
from app.models.enums import CheckTarget
from app.models.states import InseState
from app.numerics import fem2d
from app.numerics.ph_structures import verify_structure
from app.simulations import beam, inse, nanorod
from app.utils.config_io import beam_config, inse_config, nanorod_config
from app.utils.writers import write_bundle, write_summary

logger = logging.getLogger(__name__)


def _bundles(target, cfg):
    """Yield (label, bundle) pairs for one check target"""
    if target is CheckTarget.NANOROD:
        yield 'nanorod', nanorod.build_system(nanorod_config(cfg.params['nanorod']))
    elif target is CheckTarget.NANOROD_FREE:
        yield 'nanorod-free', nanorod.build_system_free(nanorod_config(cfg.params['nanorod']))
    elif target in (CheckTarget.BEAM, CheckTarget.BEAM_EXPLICIT):
        values = dict(cfg.params['beam'])
        values['model'] = 'explicit' if target is CheckTarget.BEAM_EXPLICIT else 'implicit'
        yield target.value, beam.build_system(beam_config(values))
    else:
        model = inse_config(cfg.params['inse'])
        forms = fem2d.assemble_static(inse.make_mesh(model))
        rng = np.random.default_rng(cfg.seed)
        m = forms.trace_space.n_dofs
        for k in range(cfg.params['check']['states']):
            state = InseState(rng.standard_normal(forms.psi_space.n_dofs),
                              rng.standard_normal(forms.omega_space.n_dofs),
                              np.zeros(m), np.zeros(m), np.zeros(m))
            yield f'inse-{k}', inse.assemble_frozen_system(model, forms, state)


@click.command('check')
@run_options
@click.option('--model', 'target', default=None,
              type=click.Choice([t.value for t in CheckTarget]), help='Bundle to verify.')
@click.pass_obj
def check_cmd(settings, config_path, out, snapshots, threads, seed, target):
    """Verify the structure of an assembled bundle and dump its blocks."""
    cfg = load_run_config('check', settings, config_path, out, snapshots, seed, threads)
    target = CheckTarget(target) if target else cfg.params['check']['target']
    with run_directory(cfg) as out_dir:
        reports, failed = {}, []
        for label, bundle in _bundles(target, cfg):
            report = verify_structure(bundle)
            reports[label] = report.as_dict()
            if label == target.value or not (out_dir / 'bundle').exists():
                write_bundle(out_dir / 'bundle', bundle)
            if not report.passed:
                failed.append(label)
            logger.info('%s: %s', label, 'passed' if report.passed else 'FAILED')
        write_summary(out_dir, reports, name='structure.json')
        if failed:
            raise StructureError(f"structure check failed for {', '.join(failed)}", report=reports)
    click.echo(f'check {target.value}: {len(reports)} bundle(s) passed -> {out_dir}')
