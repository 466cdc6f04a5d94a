import sys

from walkrd.cli import main

sys.exit(main())
