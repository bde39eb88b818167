"""python -m pycoherence"""

from sys import exit as sys_exit

from .cli import main

sys_exit(main())
