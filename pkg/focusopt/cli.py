"""
命令行入口
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from .components import COMMANDS
from .config import config_schema, load_config
from .utils.constants import DensityMode
from .utils.errors import FocusError, exit_code_for
from .utils.logger import configure_logging, get_logger

logger = get_logger("focusopt_cli")

__all__ = ['config_schema', 'build_parser', 'overrides_from_args', 'main']


def _common_parser() -> argparse.ArgumentParser:
    """各子命令共用的参数"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--d", type=int, help="空间维数")
    parser.add_argument("--r-min", dest="r_min", type=float, help="半径格点起点")
    parser.add_argument("--r-max", dest="r_max", type=float, help="半径格点终点")
    parser.add_argument("--r-step", dest="r_step", type=float, help="半径格点步长")
    parser.add_argument("--kmax", type=int, help="谱表最高次数")
    parser.add_argument("--resolution", type=int, help="球面网格分辨率")
    parser.add_argument("--convention", choices=["paper", "oracle"], help="Λ 前置系数约定")
    parser.add_argument("--format", choices=["csv", "json"], help="输出格式")
    parser.add_argument("--out", metavar="PATH", help="输出文件（缺省为标准输出）")
    parser.add_argument("--config", metavar="PATH", help="config.toml 路径")
    parser.add_argument("--db", metavar="PATH", help="启用 SQLite 缓存并指定路径")
    parser.add_argument("--verbose", action="store_true", help="输出 INFO 日志")
    parser.add_argument("--debug", action="store_true", help="输出 DEBUG 日志")
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="focusopt", description="单色标量波与电磁波最优聚焦的数值计算")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, cls in COMMANDS.items():
        cmd = sub.add_parser(name, parents=[common], help=cls.command_description,
                             description=cls.command_description)
        if name == "density":
            cmd.add_argument("--mode", choices=[m.value for m in DensityMode], default=DensityMode.SCALAR.value,
                             help="scalar / maxwell / maxwell_conservative")
        elif name == "verify":
            cmd.add_argument("--history", action="store_true", help="列出已保存的验证运行")
            cmd.add_argument("--limit", type=int, default=5, help="--history 列出的运行数")
        elif name == "field":
            cmd.add_argument("--density", default="ell",
                             help="ell / constant / harmonic:<k|名字> / band:<center>:<half_width>")
            cmd.add_argument("--points", metavar="PATH", help="点文件，每行一个点")
            cmd.add_argument("--x", action="append", metavar="X1,X2,...", help="单个点，可重复")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """把命令行参数整理为按节的覆盖项"""
    run_keys = ("d", "r_min", "r_max", "r_step", "kmax", "resolution", "convention", "format")
    overrides: Dict[str, Dict[str, Any]] = {
        "run": {key: getattr(args, key) for key in run_keys if getattr(args, key, None) is not None},
    }
    if args.db:
        overrides["storage"] = {"enabled": True, "db_path": args.db}
    if args.debug:
        overrides["logging"] = {"level": "DEBUG"}
    elif args.verbose:
        overrides["logging"] = {"level": "INFO"}
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """命令行主函数，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, overrides_from_args(args))
    except FocusError as e:
        print(f"配置错误: {str(e)}", file=sys.stderr)
        return exit_code_for(e)
    configure_logging(config.get("logging", {}).get("level", "WARNING"))

    options = {key: value for key, value in vars(args).items() if key not in config_schema.get("run", {})}
    try:
        command = COMMANDS[args.command](config, options)
    except FocusError as e:
        logger.error(f"参数错误: {str(e)}")
        print(str(e), file=sys.stderr)
        return exit_code_for(e)

    success, message, code = command.run()
    if message:
        logger.info(message)
        if not success:
            print(message, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
