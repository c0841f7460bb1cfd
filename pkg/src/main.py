"""
GraphLoc
Main entry point for the command-line interface
"""

from .cli import cli


def main() -> None:
    """Console script entry point"""
    cli(prog_name="graphloc")


if __name__ == "__main__":
    main()
