"""logconfig.py - optional log forwarding for creditvar runs."""
import os
import sys
import logging
import getpass
from typing import Optional

APPLICATION_NAME = 'creditvar'


def _parse_static_fields(static_fields):
    """Parse a comma-separated list of key=value pairs into a dict of extra GELF fields."""
    fields = {}
    for entry in static_fields.split(','):
        key, sep, value = entry.partition('=')
        if not sep or not key.strip():
            raise ValueError('Malformed graylog static field {!r}'.format(entry))
        fields[key.strip()] = value.strip()
    return fields


def add_graylog_handler(
    log_server: str, log_level: int = logging.INFO, static_fields: Optional[str] = None
) -> bool:
    """Add a graylog handler to the root logger.

    Args:
        log_server: Graylog server endpoint, e.g. "127.0.0.1:12201"
        log_level: Log level to filter messages by in handler
        static_fields: Comma-separated string of extra fields to include in log message
            metadata, e.g. "_desk=credit,_book=loans" (fields should have a leading
            underscore).

    Returns:
        True if the handler was installed, False if pygelf is unavailable or the endpoint
        is malformed.
    """
    try:
        from pygelf import GelfUdpHandler
    except ImportError:
        logging.error("Cannot add graylog handler - pygelf is not installed")
        return False

    host, _, port = log_server.rpartition(":")
    try:
        port = int(port)
        extra_fields = _parse_static_fields(static_fields) if static_fields else {}
    except ValueError as e:
        logging.error("Cannot add graylog handler for %s: %s", log_server, e)
        return False

    config = {
        "host": host,
        "port": port,
        "debug": True,  # Include file, line, module, func, logger_name
        "include_extra_fields": True,
        "_username": getpass.getuser(),
        "_process_id": os.getpid(),
        "_application_name": APPLICATION_NAME,
        "_command_line": " ".join(os.path.basename(arg) for arg in sys.argv[:2]),
    }
    config.update(extra_fields)

    handler: logging.Handler = GelfUdpHandler(**config)
    handler.setLevel(log_level)
    logging.getLogger().addHandler(handler)
    return True
