import sys

from wigner_matching.cli import main

if __name__ == '__main__':
    sys.exit(main())
