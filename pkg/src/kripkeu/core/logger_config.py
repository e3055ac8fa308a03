"""
基于loguru的日志配置模块
"""
import os
import sys
from datetime import datetime
from pathlib import Path

from loguru import logger


def setup_logger(app_name="kripkeu", project_root=None, console_output=True,
                 log_to_file=False, level="WARNING"):
    """配置 Loguru 日志系统

    Args:
        app_name: 应用名称，用于日志目录
        project_root: 项目根目录，默认为仓库根目录
        console_output: 是否输出到控制台 (stderr，保持 stdout 可供结构化输出)
        log_to_file: 是否写入日志文件
        level: 控制台日志级别

    Returns:
        tuple: (logger, config_info)
            - logger: 配置好的 logger 实例
            - config_info: 包含日志配置信息的字典
    """
    if project_root is None:
        project_root = Path(__file__).parent.parent.parent.parent.resolve()

    # 清除默认处理器
    logger.remove()

    def formatter(record):
        message = str(record["message"]).replace("{", "{{").replace("}", "}}").replace("<", r"\<")
        name = record["level"].name
        if name == "INFO":
            line = f"<green>✅ {message}</green>"
        elif name == "WARNING":
            line = f"<yellow>⚠️ {message}</yellow>"
        elif name in ("ERROR", "CRITICAL"):
            line = f"<red>❌ {message}</red>"
        else:
            line = f"<white>ℹ️ {message}</white>"
        return line + "\n"

    if console_output:
        logger.add(sys.stderr, level=level, format=formatter)

    config_info = {"log_file": None}
    if log_to_file:
        current_time = datetime.now()
        log_dir = os.path.join(
            project_root, "logs", app_name,
            current_time.strftime("%Y-%m-%d"), current_time.strftime("%H"),
        )
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"{current_time.strftime('%M%S')}.log")
        logger.add(
            log_file,
            level="DEBUG",
            rotation="10 MB",
            retention="30 days",
            compression="zip",
            encoding="utf-8",
            format="{time:YYYY-MM-DD HH:mm:ss} | {elapsed} | {level.icon} {level: <8} | {name}:{function}:{line} - {message}",
            enqueue=True,
        )
        config_info["log_file"] = log_file

    logger.debug(f"日志系统已初始化，应用名称: {app_name}")
    return logger, config_info
