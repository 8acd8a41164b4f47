"""Heavy-tail bandits - UCB policies built on clipped-SGD for heavy-tailed rewards."""

import os

with open(os.path.join(os.path.dirname(__file__), 'VERSION')) as _f:
    __version__ = _f.read().strip()
