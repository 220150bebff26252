import os
import sys

import pytest

_module_dir = os.environ.get("PYSOGMM_DIR")
if _module_dir and _module_dir not in sys.path:
    sys.path.insert(0, _module_dir)


@pytest.fixture(scope="session")
def cli_path():
    path = os.environ.get("SOGMM_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("SOGMM_CLI not set; CLI tests need the built binary")
    return path
