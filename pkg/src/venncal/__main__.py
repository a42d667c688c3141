import sys

from venncal.cli import main

sys.exit(main())
