"""Allow ``python3 -m mcfsm``."""

import sys

from .cli import main

sys.exit(main())
