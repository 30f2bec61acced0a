"""Commands for one-parameter families."""
import logging

from errors import CommandError, SemilinError
from routes.router import CommandRouter
from services import family

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command('scan')
def scan(cmd, env, ctx):
    """Partition the parameter line into pieces with constant fiber invariants."""
    try:
        declared = env.get(cmd.args[0])
        param = declared.names.index(cmd.args[1])
        partition = family.family_scan(declared.value, param, ctx.coeff,
                                       seed=ctx.seed, parallel=ctx.parallel)
        if ctx.validate and not partition.is_cover():
            raise CommandError("pieces do not partition the parameter line")
        return {
            'param': cmd.args[1],
            'pieces': [piece.payload().model_dump(mode='json') for piece in partition.pieces],
            'certified': all(piece.certified for piece in partition.pieces),
        }
    except SemilinError as e:
        logger.error(f"Error running scan: {e}")
        raise CommandError(str(e))
