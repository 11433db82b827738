"""Volume-product and transport-entropy inequality checks."""

from ._core import *  # noqa: F401,F403
from ._core import __version__

import json as _json
import os as _os


def run(config, jobs=1, seed=None):
    """Run a config given as a dict, a JSON string or a path.

    Returns (report, ledgers, exit_code) as the CLI would.
    """
    if isinstance(config, dict):
        text = _json.dumps(config)
    elif isinstance(config, (str, _os.PathLike)) and _os.path.exists(config):
        with open(config, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = config
    return run_config(text, jobs=jobs, seed=seed)
