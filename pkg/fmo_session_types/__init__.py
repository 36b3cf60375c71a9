"""
F^μω 会话类型工具

种类检查、基于互模拟的类型等价、一阶文法编码，以及并发项语言的类型检查与求值
"""

__version__ = "1.0.0"
__author__ = "FMO Session Types Team"
