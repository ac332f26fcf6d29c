# Copyright 2026 The diffmorph Authors
# SPDX-License-Identifier: Apache-2.0

from ._diffmorph import *  # noqa: F401,F403
from ._diffmorph import __version__  # noqa: F401
