"""
启动信息记录模块

负责记录一次命令调用开始时的有效配置
"""

from config.fmo_config import Backend, FmoConfig
from utils.log_utils import get_logger

logger = get_logger(__name__)


class StartupLogger:
    """启动信息记录器"""

    def __init__(self, config: FmoConfig, command: str = ""):
        """
        初始化启动信息记录器

        Args:
            config: 本次调用的配置
            command: 子命令名
        """
        self.config = config
        self.command = command

    def log_startup_info(self) -> None:
        """记录启动信息"""
        logger.info(f"🚀 fmo {self.command}")
        self._log_equivalence_config()
        self._log_runtime_config()
        self._log_type_context()

    def _log_equivalence_config(self) -> None:
        """记录等价判定配置"""
        backend = self.config.backend
        if backend is Backend.AUTO:
            logger.info("📋 等价后端: auto (fsa → grammar → oracle)")
        else:
            logger.info(f"📋 等价后端: {backend.value}")
        logger.info(f"📏 上限: oracle_depth={self.config.oracle_depth} node_cap={self.config.node_cap} "
                    f"fsa_cap={self.config.fsa_cap} norm_fuel={self.config.norm_fuel}")

    def _log_runtime_config(self) -> None:
        """记录求值配置"""
        logger.info(f"🎲 调度种子: {self.config.seed}，步数上限: {self.config.fuel}")

    def _log_type_context(self) -> None:
        """记录默认种类上下文"""
        entries = " | ".join(f"{name}:{kind}" for name, kind in sorted(self.config.type_context.items()))
        logger.info(f"📚 默认种类上下文: {entries or '(空)'}")
