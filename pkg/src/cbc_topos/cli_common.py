from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from typer import Argument, Option
from typer_common_functions import get_type_from_default, typer_unpacker


class OutputFormat(str, Enum):
    text = "text"
    json = "json"


@dataclass
class OutputCLIArgs:
    output_format: OutputFormat = Option(
        OutputFormat.text,
        "--format",
        envvar="CBC_FORMAT",
        help="Report format, [bold cyan]json[/bold cyan] is byte-stable across runs",
        rich_help_panel="Output",
    )


@dataclass
class ProtocolCLIArgs:
    spec_path: Path = Argument(
        ...,
        dir_okay=False,
        help="Protocol spec file (YAML or JSON)",
    )
    strict_functorial: bool = Option(
        False,
        "--strict-functorial",
        help="Treat the estimator as a functor into PC even if the protocol file does not say so",
        rich_help_panel="Protocol",
    )
    waive_estimator_condition: bool = Option(
        False,
        "--waive-estimator-condition",
        help="Accept bottom estimates; the estimator condition is reported as waived",
        rich_help_panel="Protocol",
    )


@dataclass
class SweepCLIArgs:
    seed: int = Option(0, "--seed", envvar="CBC_SEED", help="Seed of the random generators", rich_help_panel="Sweep")
    count: int = Option(1000, "--count", help="Number of random protocols", rich_help_panel="Sweep")
    max_states: int = Option(6, "--states", help="Largest number of protocol states", rich_help_panel="Sweep")
    max_consensus: int = Option(3, "--consensus", help="Largest number of consensus values", rich_help_panel="Sweep")
    exhaustive: bool = Option(
        False,
        "--exhaustive",
        help="Enumerate every protocol up to [bold cyan]--states[/bold cyan] instead of sampling",
        rich_help_panel="Sweep",
    )
    waive_estimator_condition: bool = Option(
        False,
        "--waive-estimator-condition",
        help="Allow bottom estimates in generated protocols",
        rich_help_panel="Sweep",
    )


class CommonCLI:
    def __init__(self) -> None:
        self.output = OutputCLIArgs
        self.protocol = ProtocolCLIArgs
        self.sweep = SweepCLIArgs
        self.unpacker = typer_unpacker

    @property
    def arg_annotator(self):
        """Add type annotations for

        Returns
        -------
        Callback
            Annotator function with CommonCLI Props as arguments
        """
        my_args = self.__dict__
        return get_type_from_default(*list(my_args.values()))
