"""Command registry for script verbs, shaped like an API router."""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable

from errors import CommandError
from models.reports import CoeffRing
from models.script import Command
from services.parser import Environment

logger = logging.getLogger(__name__)

Handler = Callable[[Command, Environment, 'CommandContext'], Dict[str, object]]


@dataclass(frozen=True)
class CommandContext:
    """Per-run options shared by every handler."""
    coeff: CoeffRing = CoeffRing.Q
    seed: int = 0
    validate: bool = False
    parallel: bool = False


class CommandRouter:
    """Maps verbs to handler functions registered with `@router.command(verb)`."""

    def __init__(self):
        self.handlers: Dict[str, Handler] = {}

    def command(self, verb: str):
        def register(func: Handler) -> Handler:
            if verb in self.handlers:
                raise ValueError(f"verb {verb!r} registered twice")
            self.handlers[verb] = func
            return func
        return register

    def include_router(self, other: 'CommandRouter'):
        for verb, handler in other.handlers.items():
            if verb in self.handlers:
                raise ValueError(f"verb {verb!r} registered twice")
            self.handlers[verb] = handler

    @property
    def verbs(self) -> Iterable[str]:
        return sorted(self.handlers)

    def dispatch(self, cmd: Command, env: Environment, ctx: CommandContext) -> Dict[str, object]:
        handler = self.handlers.get(cmd.verb)
        if handler is None:
            raise CommandError(f"no handler for {cmd.verb!r}")
        logger.debug(f"Dispatching {cmd.verb} {cmd.target}")
        return handler(cmd, env, ctx)
