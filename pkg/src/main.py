import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from config.experiment import SCHEMAS, env_prefix, load_config
from config.settings import LOG_FORMAT, LOG_LEVEL, RESULTS_DIR
from errors import ConfigError
from experiments import ResultStore, run


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器，每个子命令的参数由配置模式生成"""
    parser = argparse.ArgumentParser(
        prog="l1lab",
        description="高斯边缘分布下 L1 多项式回归最优性的数值实验",
        epilog="环境变量 L1LAB_<子命令>_<参数> 可覆盖配置文件中的取值，例如 "
               f"{env_prefix('degree-scan')}EPS=0.4,0.2,0.1,0.05")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMAS.items():
        sub = subparsers.add_parser(name, help=f"运行 {name}")
        sub.add_argument("--config", help="扁平 key=value 配置文件")
        sub.add_argument("--seed", help="主种子（64 位无符号整数，必需）")
        sub.add_argument("--out", help="输出目录")
        sub.add_argument("--jobs", help="并行宽度，默认取 CPU 核数")
        for key, param in schema.items():
            flag = "--" + key.replace("_", "-")
            sub.add_argument(flag, dest=key, default=None,
                             help=f"{param.help}（{param.kind}，默认 {param.default}）")
    return parser


def _report_config_error(subcommand: str, out: Optional[str], error: ConfigError) -> int:
    print("配置错误：", file=sys.stderr)
    for problem in error.problems:
        print(f"  - {problem}", file=sys.stderr)
    store = ResultStore(out or os.path.join(RESULTS_DIR, subcommand))
    store.write_error(error.to_dict())
    return error.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    # 加载环境变量
    load_dotenv()
    logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

    args = vars(build_parser().parse_args(argv))
    subcommand = args.pop("subcommand")
    config_file = args.pop("config")
    try:
        config = load_config(subcommand, config_file, args)
    except ConfigError as e:
        return _report_config_error(subcommand, args.get("out"), e)
    return run(subcommand, config)


if __name__ == "__main__":
    sys.exit(main())
