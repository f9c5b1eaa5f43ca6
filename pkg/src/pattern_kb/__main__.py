"""Allow running as: python -m pattern_kb"""

import sys

from pattern_kb.cli import main

if __name__ == "__main__":
    sys.exit(main())
