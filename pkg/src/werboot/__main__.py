import sys

from werboot.cli import main

sys.exit(main())
