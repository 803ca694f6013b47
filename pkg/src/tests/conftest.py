"""pytest configuration and parametrization for pyfeatbench tests."""
import logging

import pytest

from pyfeatbench.utils.logs import LibraryLogger


def pytest_addoption(parser):
    """Allow the end-to-end benchmark runs to be switched on."""
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run slow end-to-end benchmark tests over a synthetic dataset",
    )


def pytest_configure(config):
    """Register the slow marker."""
    config.addinivalue_line(
        "markers", "slow: end-to-end benchmark run, enabled with --runslow"
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless --runslow is given."""
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# Class attribute -> argument name of the parametrized tests
PARAM_ATTRIBUTES = {
    'detectors': 'detector',
    'descriptors': 'descriptor',
    'combinations': 'combination',
}


def pytest_generate_tests(metafunc):
    """Parametrize method tests from class attributes.

    A test class listing `detectors`, `descriptors` or `combinations` gets every
    test taking a `detector`, `descriptor` or `combination` argument run once
    per listed value.
    """
    if metafunc.cls is None:
        return
    for attribute, argname in PARAM_ATTRIBUTES.items():
        if argname not in metafunc.fixturenames:
            continue
        if attribute not in metafunc.cls.__dict__:
            continue
        values = metafunc.cls.__dict__[attribute]
        metafunc.parametrize(argname, values, ids=[str(v) for v in values])


@pytest.fixture(autouse=True)
def reset_library_logger():
    """Undo logger configuration done by CLI tests."""
    yield
    LibraryLogger.verbose = False
    LibraryLogger.debug = False
    root = logging.getLogger()
    for handler in LibraryLogger._handlers:
        root.removeHandler(handler)
        handler.close()
    LibraryLogger._handlers = []
    for name, logger in root.manager.loggerDict.items():
        if isinstance(logger, logging.Logger) and name.startswith('pyfeatbench'):
            logger.setLevel(logging.NOTSET)
