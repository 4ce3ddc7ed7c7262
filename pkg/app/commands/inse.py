import click

from app.commands.common import load_run_config, run_directory, run_options, time_label
from app.extensions import progress
from app.numerics import fem2d
from app.numerics.diagnostics import ledger_series, ledger_summary
from app.simulations import inse
from app.utils.config_io import inse_config
from app.utils.writers import write_rows_csv, write_series_csv, write_summary, write_vtk_structured


@click.command('inse')
@run_options
@click.pass_obj
def inse_cmd(settings, config_path, out, snapshots, threads, seed):
    """Dipole-wall collision with the staggered stream function / vorticity scheme."""
    cfg = load_run_config('inse', settings, config_path, out, snapshots, seed, threads)
    model = inse_config(cfg.params['inse'])
    with run_directory(cfg) as out_dir:
        forms = fem2d.assemble_static(inse.make_mesh(model))
        result = inse.run_benchmark(model, forms, cfg.snapshots, progress=progress)
        write_series_csv(out_dir / 'ledger.csv', ledger_series(result.ledgers))
        mesh = forms.mesh
        shape = (mesh.ny + 1, mesh.nx + 1)
        for t, snap in sorted(result.snapshots.items()):
            fields = {'psi': forms.psi_space.node_values(snap.psi_bar).reshape(shape),
                      'omega': forms.omega_space.vertex_values(snap.omega_bar)}
            write_vtk_structured(out_dir / f'snapshot_{time_label(t)}.vtk', mesh.xs, mesh.ys, fields,
                                 title=f'inse t={snap.t:.6g}')
        for t, (s, omega) in sorted(result.profiles.items()):
            write_rows_csv(out_dir / f'profile_{time_label(t)}.csv', ('s', 'omega'), list(zip(s, omega)))
        summary = ledger_summary(result.ledgers)
        summary['omega_e'] = result.omega_e
        summary['mesh'] = mesh.describe()
        summary['reference'] = inse.reference_comparison(result.ledgers)
        write_summary(out_dir, summary)
    click.echo(f"inse {mesh.describe()}: K={summary['K_final']:.6g} E={summary['E_final']:.6g}, "
               f"max enstrophy residual {summary['max_res_enstrophy']:.3e} -> {out_dir}")
