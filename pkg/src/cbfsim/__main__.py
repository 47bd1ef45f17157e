import sys

from cbfsim.cli import main

sys.exit(main())
