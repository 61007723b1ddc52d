"""Python entry point for the tempered-galerkin package.

This allows the tool to be invoked as:
    python -m tempered_galerkin
"""


def main() -> None:
    """Main entry point for CLI."""
    from .cli import app

    app(prog_name="tempered-galerkin")


if __name__ == "__main__":
    main()
