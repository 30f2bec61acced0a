"""Script driver for the semilinear engine: application factory and command line."""
import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from config import config
from errors import CommandError, ScriptError, SemilinError
from models.reports import CoeffRing, CommandReport, ReportEnvelope
from models.script import Command, Script
from routes import cohomology, families, topology
from routes.router import CommandContext, CommandRouter
from services import parser
from services.parser import Environment

logger = logging.getLogger(__name__)


class ScriptApp:
    """Runs the commands of a loaded script through the registered routers."""

    def __init__(self, cfg, timing: bool = True):
        self.config = cfg
        self.timing = timing
        self.router = CommandRouter()

    def include_router(self, router: CommandRouter):
        self.router.include_router(router)

    def context(self, coeff=None, seed=None, validate=None, parallel=None) -> CommandContext:
        cfg = self.config
        return CommandContext(
            coeff=CoeffRing(coeff or cfg.COEFF),
            seed=cfg.SEED if seed is None else seed,
            validate=cfg.VALIDATE if validate is None else validate,
            parallel=cfg.PARALLEL if parallel is None else parallel,
        )

    def execute(self, cmd: Command, env: Environment, ctx: CommandContext, strict: bool = False) -> CommandReport:
        start = time.perf_counter()
        try:
            result = self.router.dispatch(cmd, env, ctx)
            ok, diagnostics = True, []
        except CommandError as e:
            if strict:
                raise
            result, ok, diagnostics = {}, False, [str(e)]
        ms = round((time.perf_counter() - start) * 1000, 3) if self.timing else 0
        return CommandReport(command=cmd.verb, input=cmd.target, ok=ok,
                             result=result, diagnostics=diagnostics, ms=ms)

    def run(self, script: Script, env: Environment, ctx: Optional[CommandContext] = None,
            strict: Optional[bool] = None) -> List[CommandReport]:
        """Execute commands in script order; reports come back in the same order."""
        ctx = ctx or self.context()
        strict = self.config.STRICT if strict is None else strict
        commands = script.commands
        if ctx.parallel and not strict and len(commands) > 1:
            # handlers run their own scans sequentially under a parallel run
            inner = CommandContext(ctx.coeff, ctx.seed, ctx.validate, parallel=False)
            with ThreadPoolExecutor(max_workers=self.config.WORKERS) as pool:
                return list(pool.map(lambda cmd: self.execute(cmd, env, inner), commands))
        return [self.execute(cmd, env, ctx, strict) for cmd in commands]

    def run_text(self, text: str, **options) -> ReportEnvelope:
        strict = options.pop('strict', None)
        script, env = parser.load_text(text)
        return ReportEnvelope(reports=self.run(script, env, self.context(**options), strict))


def create_app(config_name: str = 'default', timing: bool = True) -> ScriptApp:
    """Create and configure the script app."""
    cfg = config[config_name]()
    app = ScriptApp(cfg, timing=timing)
    app.include_router(topology.router)
    app.include_router(cohomology.router)
    app.include_router(families.router)
    return app


def format_text(reports: List[CommandReport]) -> str:
    """One line per command: verb, target and either the result or the diagnostics."""
    lines = []
    for r in reports:
        body = json.dumps(r.result) if r.ok else 'error: ' + '; '.join(r.diagnostics)
        lines.append(f"{r.command} {r.input}: {body}")
    return '\n'.join(lines)


def build_parser() -> argparse.ArgumentParser:
    cli = argparse.ArgumentParser(description="Run a script of semilinear set declarations and commands.")
    cli.add_argument('script', nargs='?', help="script file (stdin when omitted)")
    cli.add_argument('--coeff', choices=[c.value for c in CoeffRing], default=None)
    cli.add_argument('--json', action=argparse.BooleanOptionalAction, default=True,
                     help="JSON envelope on stdout (default); --no-json prints one line per command")
    cli.add_argument('--seed', type=int, default=None)
    cli.add_argument('--strict', action='store_true', default=None, help="abort on the first failing command")
    cli.add_argument('--validate', action='store_true', default=None, help="run invariant audits inline")
    cli.add_argument('--parallel', action='store_true', default=None)
    cli.add_argument('--no-timing', dest='timing', action='store_false', help="report ms = 0")
    cli.add_argument('--env', default='default', choices=sorted(config))
    return cli


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config[args.env]
    logging.basicConfig(level=getattr(logging, cfg.LOG_LEVEL, logging.INFO), stream=sys.stderr)
    app = create_app(args.env, timing=args.timing)

    try:
        if args.script:
            with open(args.script, encoding='utf-8') as handle:
                text = handle.read()
        else:
            text = sys.stdin.read()
    except UnicodeDecodeError as e:
        head = e.object[:e.start]
        line, column = head.count(b"\n") + 1, e.start - head.rfind(b"\n")
        logger.error(f"Error decoding script: {e}")
        print(f"error: {line}:{column}: invalid UTF-8 byte 0x{e.object[e.start]:02x}", file=sys.stderr)
        return 2
    except OSError as e:
        logger.error(f"Error reading script: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2

    try:
        script, env = parser.load_text(text)
    except ScriptError as e:
        logger.error(f"Error loading script: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SemilinError as e:
        logger.error(f"Error evaluating declarations: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2

    ctx = app.context(args.coeff, args.seed, args.validate, args.parallel)
    try:
        reports = app.run(script, env, ctx, args.strict)
    except CommandError as e:
        logger.error(f"Aborting on failed command: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.json:
        print(ReportEnvelope(reports=reports).model_dump_json())
    else:
        print(format_text(reports))
    return 0 if all(r.ok for r in reports) else 1


if __name__ == '__main__':
    sys.exit(main())
