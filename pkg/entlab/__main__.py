import sys

from entlab.cli import main

sys.exit(main())
