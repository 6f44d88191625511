# tschains/__main__.py
import sys

from tschains.core import main

if __name__ == "__main__":
    sys.exit(main())
