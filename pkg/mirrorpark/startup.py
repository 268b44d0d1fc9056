"""
configures logging for command line runs

library modules only do log = logging.getLogger(). handlers are set here.
"""
import warnings
from os.path import join, expanduser, exists, dirname
import yaml
import logging
from logging.config import dictConfig
log = logging.getLogger()

PACKAGED = join(dirname(__file__), "logging.yaml")


def setup_logging(path=None, verbose=False):
    """ dictConfig from path, ~/logging.yaml or the packaged file. basic logging if that fails """
    if path is None:
        home = join(expanduser("~"), "logging.yaml")
        path = home if exists(home) else PACKAGED
    try:
        with open(path) as f:
            dictConfig(yaml.safe_load(f))
    except Exception:
        logging.basicConfig(level=logging.INFO)
        log.warning(f"cannot configure logging from {path}. using basic logging")

    if verbose:
        log.setLevel(logging.DEBUG)
    if log.getEffectiveLevel() > logging.DEBUG:
        warnings.filterwarnings("ignore")
