"""
Logging setup
- Coloured console output with ordinal dates
- Plain UTF-8 log file next to the run
"""

import logging
import os
from datetime import datetime
from typing import Optional

DEFAULT_LOG_FILE = "tickvol.log"


class OrdinalDateFormatter(logging.Formatter):
    """Custom formatter with ordinal dates and colored output"""

    LEVEL_COLORS = {
        'DEBUG': {'time': '\033[36m', 'level': '\033[36m', 'message': '\033[36m'},
        'INFO': {'time': '\033[94m', 'level': '\033[92m', 'message': '\033[92m'},
        'WARNING': {'time': '\033[94m', 'level': '\033[93m', 'message': '\033[93m'},
        'ERROR': {'time': '\033[94m', 'level': '\033[91m', 'message': '\033[91m'},
        'CRITICAL': {'time': '\033[94m', 'level': '\033[95m', 'message': '\033[95m'}
    }

    RESET = '\033[0m'

    def __init__(self, use_color: bool = True):
        super().__init__()
        self.use_color = use_color

    @staticmethod
    def ordinal_date(created: float) -> str:
        dt = datetime.fromtimestamp(created)
        day = dt.day
        if 10 <= day % 100 <= 20:
            suffix = 'th'
        else:
            suffix = {1: 'st', 2: 'nd', 3: 'rd'}.get(day % 10, 'th')
        return f"{day}{suffix} {dt.strftime('%b')} {dt.year} {dt.strftime('%I:%M:%S %p')}"

    def format(self, record):
        ordinal_date = self.ordinal_date(record.created)
        message = record.getMessage()
        if record.exc_info:
            message = f"{message}\n{self.formatException(record.exc_info)}"

        if not self.use_color:
            return f"{ordinal_date} - {record.levelname} - {message}"

        colors = self.LEVEL_COLORS.get(record.levelname, self.LEVEL_COLORS['INFO'])
        colored_time = f"{colors['time']}{ordinal_date}{self.RESET}"
        colored_level = f"{colors['level']}{record.levelname}{self.RESET}"
        colored_message = f"{colors['message']}{message}{self.RESET}"
        return f"{colored_time} - {colored_level} - {colored_message}"


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """
    Configure root logging for a command-line run.

    Args:
        level: Level name; falls back to TICKVOL_LOG_LEVEL, then INFO
        log_file: Log file path; falls back to TICKVOL_LOG_FILE, then tickvol.log.
            An empty string disables the file handler.

    Returns:
        The package logger
    """
    level_name = (level or os.getenv("TICKVOL_LOG_LEVEL") or "INFO").upper()
    numeric_level = logging.getLevelName(level_name)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(OrdinalDateFormatter(use_color=stream_handler.stream.isatty()))
    handlers: list[logging.Handler] = [stream_handler]

    if log_file is None:
        log_file = os.getenv("TICKVOL_LOG_FILE", DEFAULT_LOG_FILE)
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s',
                                                    datefmt='%d %b %Y %I:%M %p'))
        handlers.insert(0, file_handler)

    logging.basicConfig(level=numeric_level, handlers=handlers, force=True)
    return logging.getLogger("tickvol")
