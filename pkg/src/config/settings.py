import os
from dotenv import load_dotenv

# 获取项目根目录路径
ROOT_DIR = os.path.dirname(os.path.dirname(
    os.path.dirname(os.path.abspath(__file__))))

# 加载环境变量
load_dotenv()

# 环境变量前缀，所有配置项都可以用 L1LAB_<名称> 覆盖
ENV_PREFIX = "L1LAB_"


def _env(name: str, default, cast=str):
    """读取带前缀的环境变量，未设置时返回默认值"""
    value = os.getenv(ENV_PREFIX + name)
    if value is None or value == "":
        return default
    return cast(value)


# 输出与日志配置
RESULTS_DIR = _env("RESULTS_DIR", os.path.join(ROOT_DIR, "results"))
LOG_LEVEL = _env("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# 随机数配置
DEFAULT_SEED = _env("DEFAULT_SEED", 20240601, int)
MC_CHUNK_SIZE = _env("MC_CHUNK_SIZE", 100_000, int)

# 求积配置
QUADRATURE_MAX_ORDER = 1000
TENSOR_GRID_LIMIT = _env("TENSOR_GRID_LIMIT", 10**7, int)
TENSOR_MAX_DIMENSION = 4
EXPAND_MC_SAMPLES = _env("EXPAND_MC_SAMPLES", 200_000, int)

# Hermite 展开配置
HERMITE_DROP_TOLERANCE = 1e-14
HARMONIC_FD_STEP = _env("HARMONIC_FD_STEP", 0.25, float)

# 线性规划配置
LP_METHOD = _env("LP_METHOD", "highs")
LP_TOLERANCE = _env("LP_TOLERANCE", 1e-9, float)
LP_MAX_ITERATIONS = _env("LP_MAX_ITERATIONS", 50_000, int)
SIMPLEX_MAX_VARIABLES = 20_000
SIMPLEX_MAX_CONSTRAINTS = 500
HIGHS_MAX_VARIABLES = _env("HIGHS_MAX_VARIABLES", 2_000_000, int)
HIGHS_MAX_CONSTRAINTS = _env("HIGHS_MAX_CONSTRAINTS", 5_000, int)
HIGHS_FEASIBILITY_TOLERANCE = 1e-10

# 网格测度配置：阶数取 max(GRID_MIN_ORDER, GRID_ORDER_PER_DEGREE * d)
GRID_MIN_ORDER = _env("GRID_MIN_ORDER", 200, int)
GRID_ORDER_PER_DEGREE = 4
WITNESS_RESIDUAL_ORDER = 400
DEGREE_SCAN_MAX = 200

# CSQ 困难函数配置
CSQ_EXPANSION_DEGREE = _env("CSQ_EXPANSION_DEGREE", 40, int)
CSQ_EXPANSION_ORDER = _env("CSQ_EXPANSION_ORDER", 200, int)

# 圆周对称化配置：k 取最接近 CIRCLE_K_FACTOR*ln d 的奇数，t = CIRCLE_T_FACTOR*ln d/d
CIRCLE_K_FACTOR = _env("CIRCLE_K_FACTOR", 3.0, float)
CIRCLE_T_FACTOR = _env("CIRCLE_T_FACTOR", 0.1, float)
CIRCLE_GRID_POINTS = _env("CIRCLE_GRID_POINTS", 2048, int)
DERIVATIVE_GRID_POINTS = 4096

# 学习器配置
LEARNER_MAX_BASIS = _env("LEARNER_MAX_BASIS", 3500, int)
LEARNER_SAMPLES_PER_BASIS = 10
RIDGE = 1e-10

# SQ 预言机配置
ORACLE_QUADRATURE_ORDER = _env("ORACLE_QUADRATURE_ORDER", 24, int)
ORACLE_MAX_SUBSPACE = 4

# 统计检验配置
SE_MULTIPLIER = 5.0
