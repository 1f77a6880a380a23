import copy

from .base import *


LOGGING = copy.deepcopy(LOGGING)
LOGGING['loggers']['hyperslender']['level'] = 'INFO'
