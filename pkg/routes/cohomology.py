"""Commands computing cohomology groups and checking the axioms they satisfy."""
import logging

from errors import CommandError, SemilinError
from routes.router import CommandRouter
from services import celldec, cohom
from services.parser import cell_from_bindings

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command('betti')
def betti(cmd, env, ctx):
    """H^p of a definably compact set."""
    try:
        s = env.get(cmd.args[0]).value
        report = cohom.betti(s, ctx.coeff)
        if ctx.validate:
            count = len(celldec.connected_components(s))
            if report.rank(0) != count and ctx.coeff.is_field:
                raise CommandError(f"rank H^0 = {report.rank(0)} but {count} components")
        return {'betti': report.model_dump(mode='json')}
    except SemilinError as e:
        logger.error(f"Error running betti: {e}")
        raise CommandError(str(e))


@router.command('betti_c')
def betti_c(cmd, env, ctx):
    """H^p_c of a locally closed set."""
    try:
        s = env.get(cmd.args[0]).value
        report = cohom.betti_c(s, ctx.coeff)
        result = {'betti_c': report.model_dump(mode='json')}
        if ctx.validate and ctx.coeff.is_field:
            result['pair_sequence_exact'] = cohom.exactness_of_pair(s, ctx.coeff)
        return result
    except SemilinError as e:
        logger.error(f"Error running betti_c: {e}")
        raise CommandError(str(e))


@router.command('mv')
def mv(cmd, env, ctx):
    try:
        X, U, V = (env.get(name).value for name in cmd.args)
        return cohom.mv_check(X, U, V, ctx.coeff).as_dict()
    except (SemilinError, ValueError) as e:
        logger.error(f"Error running mv: {e}")
        raise CommandError(str(e))


@router.command('homotopy')
def homotopy(cmd, env, ctx):
    try:
        s = env.get(cmd.args[0]).value
        a, b = cmd.args[1], cmd.args[2]
        report = cohom.homotopy_report(s, a, b, ctx.coeff)
        result = {'holds': report.holds, 'interval': [a, b]}
        if report.betti is not None:
            result['betti'] = [r.model_dump(mode='json') for r in report.betti]
        result['betti_c'] = [r.model_dump(mode='json') for r in report.betti_c]
        return result
    except (SemilinError, ValueError) as e:
        logger.error(f"Error running homotopy: {e}")
        raise CommandError(str(e))


@router.command('table')
def table(cmd, env, ctx):
    """Cohomology of a cell with its core removed."""
    try:
        cell = cell_from_bindings(cmd.cell)
        t, s = cmd.args
        report = cohom.complement_table(cell, t, s, ctx.coeff)
        result = {'cell': cell.describe(), 'dim': cell.dim, 't': t, 's': s,
                  'betti': report.model_dump(mode='json')}
        if ctx.validate:
            result['core_acyclic'] = cohom.cell_acyclic(cell, t, s, ctx.coeff)
        return result
    except (SemilinError, ValueError) as e:
        logger.error(f"Error running table: {e}")
        raise CommandError(str(e))
