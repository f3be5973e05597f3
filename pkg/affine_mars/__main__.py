"""python -m affine_mars 진입점."""
import sys


def main():
    from affine_mars.cli import main as cli_main
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
