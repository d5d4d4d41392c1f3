import sys

from qps.cli import main

sys.exit(main())
