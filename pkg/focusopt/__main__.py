"""
python -m focusopt
"""

import sys

from .cli import main

sys.exit(main())
