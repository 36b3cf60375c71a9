import logging
from logging.handlers import RotatingFileHandler
import os
import sys

from config.base_config import LoggingConfig

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROJECT_NAME = os.path.basename(PROJECT_ROOT)

# 相对路径相对于包根目录；配置为空字符串时不写文件
_configured_file = LoggingConfig.get('file', f"logs/{PROJECT_NAME}.log")
if _configured_file and not os.path.isabs(_configured_file):
    _configured_file = os.path.join(PROJECT_ROOT, _configured_file)
LOG_PATH = _configured_file or ""

FILE_LEVEL = LoggingConfig.get('level', 'INFO')
CONSOLE_LEVEL = LoggingConfig.get('console', 'WARNING')
LOG_FORMAT = LoggingConfig.get('format', "%(asctime)s %(levelname)s %(filename)s:%(lineno)s %(message)s")


def extended_seconds_to_hms(seconds) -> str:
    days, remainder = divmod(seconds, 86400)
    hours, remainder = divmod(remainder, 3600)
    minutes, seconds = divmod(remainder, 60)

    if days > 0:
        return f"{int(days):d}:{int(hours):02d}:{int(minutes):02d}:{int(seconds):02d}"
    else:
        return f"{int(hours):02d}:{int(minutes):02d}:{int(seconds):02d}"


def format_elapsed(seconds: float) -> str:
    """耗时的可读形式：一秒以内用毫秒"""
    if seconds < 1:
        return f"{seconds * 1000:.1f}ms"
    return extended_seconds_to_hms(seconds)


def get_logger(logger_name: str, log_file: str = LOG_PATH) -> logging.Logger:
    logger = logging.getLogger(logger_name)

    # 检查logger是否已经有处理器，如果有，直接返回
    if logger.handlers:
        return logger

    FMT = logging.Formatter(LOG_FORMAT)
    # CLI 的标准输出只留给结果，日志一律写 stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(FMT)
    console_handler.setLevel(CONSOLE_LEVEL)
    if log_file:
        try:
            os.makedirs(os.path.dirname(log_file), exist_ok=True)
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=LoggingConfig.get('max_size_mb', 10) * 1024 * 1024,
                backupCount=LoggingConfig.get('backup_count', 5),
                encoding='utf-8'
            )
            file_handler.setFormatter(FMT)
            file_handler.setLevel(FILE_LEVEL)
            logger.addHandler(file_handler)
        except OSError:
            # 只读目录下退化为只输出到控制台
            pass

    logger.addHandler(console_handler)
    logger.setLevel(logging.DEBUG)

    # 防止日志传播到根日志器
    logger.propagate = False

    return logger
