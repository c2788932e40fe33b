import sys

from compmdp.main import main

sys.exit(main())
