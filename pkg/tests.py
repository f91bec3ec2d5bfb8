"""
Runs the Unit Tests for the nanowire control laboratory. The desk-scale acceptance runs are skipped
unless LLG_RUN_ACCEPTANCE=1.
"""

import unittest

# pylint: disable=unused-import, wildcard-import, unused-wildcard-import
from test_acceptance import *
from test_analytic_walls import *
from test_cli import *
from test_config import *
from test_control_experiments import *
from test_data_file_interaction import *
from test_decomposition_stability import *
from test_field_core import *
from test_frame_reduction import *
from test_llg_dynamics import *

if __name__ == "__main__":
    unittest.main()
