"""Main CLI."""

from typing import Optional

import typer
from dotenv import load_dotenv
from rich import print as rich_print

from .commands import compatible_states, decided, full_report, safety, semantics, sweep, validate_spec, verify
from .helpers.system import set_logging
from .version import __version__


def main_callback(
    verbose: Optional[bool] = typer.Option(
        False,
        "--verbose",
        "-v",
        envvar="CBC_VERBOSE",
        help="Verbose Logging with Error stacktraces",
    )
):
    set_logging(verbose=verbose)


def print_version():
    """
    Print the cbc-topos version.
    """
    rich_print(f"cbc-topos Version: [bold green]{__version__}[/bold green]")


def main_cli():
    load_dotenv(".env", override=True)

    help_text = "Safety verification for estimate consensus protocols over finite copresheaf toposes"
    app = typer.Typer(no_args_is_help=True, callback=main_callback, rich_markup_mode="rich", help=help_text)

    app.command("version")(print_version)
    app.command("validate")(validate_spec)
    app.command("safety")(safety)
    app.command("compatible")(compatible_states)
    app.command("decided")(decided)
    app.command("verify")(verify)
    app.command("semantics")(semantics)
    app.command("sweep")(sweep)
    app.command("report")(full_report)
    return app


def launch_cli():
    app = main_cli()
    app()
