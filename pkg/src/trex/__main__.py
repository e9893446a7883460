from trex.cli import main
import sys

sys.exit(main())
