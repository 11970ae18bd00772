import sys

from eventir.cli import main

sys.exit(main())
