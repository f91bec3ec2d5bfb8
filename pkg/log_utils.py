"""
Contains the shared logging helper of the nanowire control laboratory.
"""

import logging

from config import Severity

LOGGER = logging.getLogger("nanowire")

_LEVELS = {
    Severity.MAJOR: logging.ERROR,
    Severity.INVALID: logging.ERROR,
    Severity.MINOR: logging.WARNING,
    Severity.INFO: logging.INFO,
}


def print_and_log(message: str, severity: Severity = Severity.INFO, src: str = "LLG") -> None:
    """
    Logs a message at the level matching its severity. MAJOR and INVALID messages are
    also printed so they reach an operator running without a log handler.
    @param message (str): The message to log
    @param severity (Severity): The severity of the message
    @param src (str): The source of the message
    """
    LOGGER.log(_LEVELS[severity], "%s: %s", src, message)
    if severity in (Severity.MAJOR, Severity.INVALID):
        print(f"{src} [{severity.value}]: {message}")
