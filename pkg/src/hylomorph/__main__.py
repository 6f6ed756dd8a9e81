import sys

from hylomorph.cli import main

sys.exit(main())
