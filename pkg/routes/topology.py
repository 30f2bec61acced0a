"""Commands for point-set topology: property checks, components and closures."""
import logging

from errors import CommandError, SemilinError
from routes.router import CommandRouter
from services import celldec, stratal

logger = logging.getLogger(__name__)

router = CommandRouter()

PROPERTY_CHECKS = {
    'open': stratal.is_open,
    'closed': stratal.is_closed,
    'locally_closed': stratal.is_locally_closed,
    'bounded': stratal.is_bounded,
    'compact': stratal.is_definably_compact,
}


@router.command('check')
def check(cmd, env, ctx):
    """Decide one property, or all of them when none is named."""
    try:
        s = env.get(cmd.args[0]).value
        names = cmd.args[1:] or tuple(PROPERTY_CHECKS)
        result = {name: PROPERTY_CHECKS[name](s) for name in names}
        if 'locally_closed' in result and not result['locally_closed']:
            witness = stratal.not_locally_closed_witness(s)
            result['witness'] = stratal.format_point(witness)
        return result
    except SemilinError as e:
        logger.error(f"Error running check: {e}")
        raise CommandError(str(e))


@router.command('components')
def components(cmd, env, ctx):
    try:
        s = env.get(cmd.args[0]).value
        parts = celldec.connected_components(s)
        return {
            'count': len(parts),
            'components': [part.describe() for part in parts],
        }
    except SemilinError as e:
        logger.error(f"Error running components: {e}")
        raise CommandError(str(e))


@router.command('closure')
def closure(cmd, env, ctx):
    try:
        s = env.get(cmd.args[0]).value
        closed = stratal.closure(s)
        result = {'closure': closed.describe(), 'dimension': stratal.dimension(closed)}
        if ctx.validate and not stratal.is_closed(closed):
            raise CommandError("closure is not closed")
        return result
    except SemilinError as e:
        logger.error(f"Error running closure: {e}")
        raise CommandError(str(e))
