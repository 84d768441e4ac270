import sys

from mapgroups.cli import main

sys.exit(main())
