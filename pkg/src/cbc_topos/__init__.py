from .cli import launch_cli
from .version import __version__
