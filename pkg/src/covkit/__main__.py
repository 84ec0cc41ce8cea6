import sys

from covkit.cli import main

sys.exit(main())
