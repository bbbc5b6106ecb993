import sys

from rescorr.cli import main

sys.exit(main())
