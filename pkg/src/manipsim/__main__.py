import sys

from manipsim.cli import main

sys.exit(main())
