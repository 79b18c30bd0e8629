import sys

from polarqfi.harness.cli import main

sys.exit(main())
