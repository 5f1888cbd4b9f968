import sys

from botnet_rgg.harness.cli import main

sys.exit(main())
