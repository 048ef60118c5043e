"""Module entry point so ``python -m twochan`` behaves like the console script."""

from .cli import entry

if __name__ == "__main__":
    entry()
