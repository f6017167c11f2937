"""Helper functions around the host system: logging setup and size guardrails"""

import logging
import os
from dataclasses import dataclass

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.traceback import install as install_rich_traceback

from .errors import ToposError

LOGGER = logging.getLogger(__name__)


class SizeLimitError(ToposError):
    """Raised when an enumeration would exceed a configured bound."""


def _env_int(varname: str, default: int) -> int:
    """Read an integer env var, falling back to default when unset or empty."""
    raw = os.getenv(varname)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ToposError(f"Env Variable: {varname} must be an integer, got '{raw}'") from e


@dataclass(frozen=True)
class SizeLimits:
    """Bounds that make exponential enumerations explicit instead of silent.

    Parameters
    ----------
    max_powerset_size : int
        largest |S| for which P(S) is materialised
    max_out_arrows : int
        largest number of arrows out of one object for cosieve enumeration
    max_family_candidates : int
        largest number of candidate cosieve families tried per object of the direct image
    max_sub_elements : int
        largest total element count of a copresheaf whose subobjects are enumerated
    """

    max_powerset_size: int = 16
    max_out_arrows: int = 20
    max_family_candidates: int = 2**20
    max_sub_elements: int = 20

    @classmethod
    def from_env(cls) -> "SizeLimits":
        return cls(
            max_powerset_size=_env_int("CBC_MAX_POWERSET_SIZE", cls.max_powerset_size),
            max_out_arrows=_env_int("CBC_MAX_OUT_ARROWS", cls.max_out_arrows),
            max_family_candidates=_env_int("CBC_MAX_FAMILY_CANDIDATES", cls.max_family_candidates),
            max_sub_elements=_env_int("CBC_MAX_SUB_ELEMENTS", cls.max_sub_elements),
        )


def check_size(what: str, size: int, bound: int) -> None:
    """Raise SizeLimitError if size exceeds bound.

    Parameters
    ----------
    what : str
        human readable name of the quantity, used in the error message
    size : int
        the actual size
    bound : int
        configured maximum
    """
    if size > bound:
        raise SizeLimitError(f"{what} is {size}, above the configured limit of {bound}", witness=size)


def set_logging(verbose: bool = False) -> None:
    """
    Set the Logging Config according to passed arguments.

    Parameters
    ----------
    verbose : bool
        Wether to Log debug Messages
    """
    if verbose:
        install_rich_traceback(suppress=[click])
        logging.basicConfig(
            level=logging.DEBUG,
            format="[italic bright_black]{name}:[/] {message}",
            style="{",
            handlers=[
                RichHandler(
                    level=logging.DEBUG,
                    console=Console(stderr=True),
                    markup=True,
                    show_path=True,
                    rich_tracebacks=True,
                    tracebacks_show_locals=True,
                )
            ],
            datefmt="%Y-%m-%d %H:%M:%S",
        )
    else:
        logging.basicConfig(
            level=logging.INFO,
            format="{message}",
            style="{",
            handlers=[
                RichHandler(level=logging.INFO, console=Console(stderr=True), show_path=False, rich_tracebacks=False)
            ],
            datefmt="%Y-%m-%d %H:%M:%S",
        )
