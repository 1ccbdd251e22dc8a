"""Entry point for python -m lwasim."""

from lwasim.cli.main import run_cli

if __name__ == "__main__":
    run_cli()
