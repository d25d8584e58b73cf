import logging
import sys
from typing import Sequence

import click
import typer
from pydantic import ValidationError

from ordest.commands import cmd_analyze, cmd_estimate, cmd_exact, cmd_simulate, cmd_verify
from ordest.errors import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    DatasetError,
    DomainError,
    NumericalError,
)

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="ordest",
    help="Estimation of two ordered location parameters under bivariate symmetric errors.",
    add_completion=False,
    pretty_exceptions_enable=False,
)

app.command("estimate")(cmd_estimate)
app.command("simulate")(cmd_simulate)
app.command("exact")(cmd_exact)
app.command("analyze")(cmd_analyze)
app.command("verify")(cmd_verify)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=None if argv is None else list(argv),
            prog_name="ordest",
            standalone_mode=False,
        )
    except click.ClickException as err:
        err.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        logger.error("Aborted")
        return EXIT_USAGE
    except (DomainError, DatasetError, ValidationError) as err:
        logger.error("Invalid input: %s", err)
        typer.echo(f"Error: {err}", err=True)
        return EXIT_USAGE
    except NumericalError as err:
        logger.error("Numeric failure: %s", err)
        typer.echo(f"Error: {err}", err=True)
        return EXIT_NUMERIC
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    sys.exit(main())
