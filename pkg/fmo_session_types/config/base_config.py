import yaml
import os
from typing import Dict, Any, Optional


def _load_config(config_path: str = "config.yml") -> Optional[Dict[str, Any]]:
    """
    内部函数：加载并解析 YAML 配置文件。

    Args:
        config_path: 配置文件路径

    Returns:
        配置字典或 None（如果加载失败）
    """
    # 如果是相对路径，则相对于项目根目录
    if not os.path.isabs(config_path):
        current_dir = os.path.dirname(os.path.abspath(__file__))
        project_root = os.path.dirname(current_dir)
        config_path = os.path.join(project_root, config_path)

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            config_data = yaml.safe_load(f)
        return config_data
    except FileNotFoundError:
        return None
    except yaml.YAMLError as exc:
        # 日志模块依赖本模块，这里只能直接写 stderr
        import sys
        print(f"Error parsing YAML file: {exc}. Using default configuration.", file=sys.stderr)
        return None


# 在模块加载时执行配置加载和解析
_loaded_config = _load_config() or {}

# 等价判定配置（后端、各阶段上限）
EquivalenceConfig: Dict[str, Any] = _loaded_config.get('equivalence') or {}

# 求值配置（调度种子、步数）
RuntimeConfig: Dict[str, Any] = _loaded_config.get('runtime') or {}

# 输出配置
OutputConfig: Dict[str, Any] = _loaded_config.get('output') or {}

# 默认种类上下文：类型名 -> 种类文本
TypeContextConfig: Dict[str, str] = _loaded_config.get('type_context') or {}

# 日志配置
LoggingConfig: Dict[str, Any] = _loaded_config.get('logging') or {}


if __name__ == "__main__":
    for section, values in (("equivalence", EquivalenceConfig), ("runtime", RuntimeConfig),
                            ("output", OutputConfig), ("type_context", TypeContextConfig)):
        print(f"--- {section} ---")
        for key, value in values.items():
            print(f"  {key}: {value}")
