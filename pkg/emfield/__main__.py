import sys

from emfield.cli import main

sys.exit(main())
