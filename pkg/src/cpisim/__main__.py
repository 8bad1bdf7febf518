# Copyright (C) 2026, the cpisim authors
#
# This software is provided "as is" without warranty of any kind,
# either expressed or implied, including but not limited to the
# implied warranties of fitness for a particular purpose.
#
# See the LICENSE file for more information.

import sys

import cpisim.cli

sys.exit(cpisim.cli.main())
