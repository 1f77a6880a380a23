import copy

from .base import *


BUMP_COUNT = 6
ADMISSIBILITY_GRID_POINTS = 512
LOGGING = copy.deepcopy(LOGGING)
LOGGING['loggers']['hyperslender']['level'] = 'ERROR'
