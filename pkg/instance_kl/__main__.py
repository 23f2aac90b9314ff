"""python -m instance_kl"""

import sys

from instance_kl.tools.cli import main

sys.exit(main())
