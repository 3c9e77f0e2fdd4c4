"""
日志获取
"""

import logging

ROOT_LOGGER_NAME = "focusopt"


def get_logger(name: str) -> logging.Logger:
    """返回 focusopt 命名空间下的日志器，库代码本身不配置 handler"""
    if name.startswith(ROOT_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def configure_logging(level: str = "WARNING") -> None:
    """命令行入口调用一次，设置根日志格式和级别"""
    numeric = getattr(logging, str(level).upper(), logging.WARNING)
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    logging.getLogger(ROOT_LOGGER_NAME).setLevel(numeric)
