import sys

from scripts.qvt import main

if __name__ == "__main__":
    sys.exit(main())
