"""Main CLI"""
from .cli import launch_cli

if __name__ == "__main__":
    launch_cli()
