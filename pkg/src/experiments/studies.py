import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config.settings import SE_MULTIPLIER
from errors import AnalysisError, DegenerateInputError, ParameterError
from approx import (
    best_l1,
    best_l2,
    continuous_l1_error,
    csq_hard_function,
    degree_profile,
    dual_witness,
    dual_witness_real,
    fit_scaling,
    lp_error,
)
from frames import frame_family
from instances import (
    Adversary,
    LearnerConfig,
    NullDistribution,
    OracleMode,
    PlantedReal,
    StatOracle,
    Verdict,
    correlation_bound_check,
    distinguish_boolean,
    distinguish_real,
    planted_distribution,
    sq_dimension_estimate,
)
from learners import Metric, evaluate, l1_regression, l2_regression, threshold_hypothesis
from moment_match import (
    MomentMatchSpec,
    check_moments,
    density_ratio_histogram,
    product_moments,
    ptf_separation,
    sample_families,
)
from moment_match.statistics import MAX_MOMENT_DEGREE
from noise import (
    TrigPolynomial,
    bk_identity_check,
    chebyshev_circle_interpolate,
    circle_symmetrization_check,
    derivative_bound_check,
    filtering_identity_check,
    gns_estimate,
    gns_intersection_scan,
    halfspace_gns_closed_form,
    ptf_gns_sanity,
)
from quadrature import gauss_hermite_rule, grid_order, make_rng, tensor_points
from targets import breakpoints, make_target
from .runner import RunResult, parallel_map, study

logger = logging.getLogger(__name__)

# 圆周恒等式随机实例使用的随机流
IDENTITY_STREAM = 10

# 实值植入变体缺省要求 E[f·g] ≥ 0.05，即 C ≤ 20
REAL_WITNESS_EPSILON = 0.05


def first_below(errors: Sequence[float], epsilon: float, d_max: int) -> int:
    """误差首次严格小于 ε 的次数，没有时返回 d_max + 1"""
    for d, error in enumerate(errors):
        if error < epsilon:
            return d
    return d_max + 1


@study("degree-scan")
def degree_scan(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """min_degree 对 ε 的扫描与标度拟合

    只计算一次到 min(eps) 为止的误差曲线，各 ε 的最小次数从曲线上读出。
    """
    target = make_target(params["target"])
    norm = params["norm"]
    eps = [float(e) for e in params["eps"]]
    d_max = params["d_max"]
    method = params.get("method")
    power = params.get("lp_power") or 4.0
    rule = gauss_hermite_rule(grid_order(d_max))

    profile = degree_profile(target, norm, d_max, rule, method, stop_below=min(eps))
    degrees = [first_below(profile, e, d_max) for e in eps]

    def cell(pair):
        e, d = pair
        row = {"target": target.name, "norm": norm, "eps": e, "degree": d,
               "error": None, "lp_power": power, "lp_error": None}
        if d <= d_max:
            fitted = best_l1(target, d, rule, method) if norm == "L1" else best_l2(target, d, rule)
            row["error"] = fitted.error
            row["lp_error"] = lp_error(target, fitted.polynomial, power, rule)
        return row

    rows = parallel_map(cell, list(zip(eps, degrees)), jobs)
    summary: Dict[str, Any] = {"target": target.name, "norm": norm, "degrees": degrees,
                               "sentinel_hits": sum(d > d_max for d in degrees), "fit": None}
    span = max(eps) / min(eps)
    if len(eps) >= 4 and span >= 4:
        try:
            fit = fit_scaling(eps, degrees)
            summary["fit"] = fit.to_dict()
            summary["loglog_slope"] = fit.loglog_slope
            summary["log2_r_squared"] = fit.log2_r_squared
        except AnalysisError as e:
            logger.warning("标度拟合退化：%s", e)
    profile_rows = [{"degree": d, "error": error} for d, error in enumerate(profile)]
    return RunResult({"degree_scan": rows, "profile": profile_rows}, summary)


@study("duality")
def duality(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """对偶见证最优值与 d−1 次最佳 L1 误差的比较，两侧共用同一网格"""
    f = make_target(params["target"])
    rule = gauss_hermite_rule(params["order"])
    method = params.get("method")

    def cell(d: int) -> dict:
        witness = dual_witness(f, d, rule, method)
        primal = best_l1(f, d - 1, rule, method, tie_break=False).error
        return {"target": f.name, "d": d, "rule_order": rule.order,
                "witness_opt": witness.correlation, "primal_opt": primal,
                "gap": abs(witness.correlation - primal),
                "moment_residual": witness.moment_residual,
                "continuous_residual": witness.continuous_residual,
                "opt": witness.opt}

    rows = parallel_map(cell, params["d"], jobs)
    return RunResult({"duality": rows}, {"max_gap": max(r["gap"] for r in rows),
                                         "max_moment_residual": max(r["moment_residual"] for r in rows)})


def ptf_study(k: int, d: int, n_samples: int, seed: int) -> dict:
    """PTF 分离与连续 L1 误差的一致性"""
    separation = ptf_separation(k, d, n_samples, seed)
    f = make_target("piecewise_ptf", k=k, a=separation.a)
    fitted = best_l1(f, d)
    row = separation.to_dict()
    row["grid_l1_error"] = fitted.error
    row["continuous_l1_error"] = continuous_l1_error(f, fitted.polynomial, breakpoints(f))
    row["consistent"] = row["continuous_l1_error"] >= separation.certified_lower_bound
    return row


@study("moment-match")
def moment_match(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    n_attempts = params["n_samples"]

    def cell(d: int):
        spec = MomentMatchSpec.from_degree(d, seed)
        # 至少保留一列用于边缘分布的 KS 检验
        keep = min(max(params["product_columns"], 1), spec.t)
        sample = sample_families(spec, n_attempts=n_attempts, keep_columns=keep, seed=seed)
        report = check_moments(sample, min(d, MAX_MOMENT_DEGREE))
        row = {"d": d, "t": spec.t, "c": spec.c, "a": spec.a, "n_attempts": sample.n_attempts}
        row.update({k: v for k, v in report.to_row().items() if k != "d"})
        # 全部分量来自 E 时间隙概率只近似为 ½，偏差不超过 ½(1−c)^t
        bias = 0.5 * (1.0 - spec.c) ** spec.t
        gap_matches = (abs(report.gap_mass - report.expected_gap_mass)
                       <= SE_MULTIPLIER * report.gap_std_error + bias)
        row.update({"gap_mass_se": report.gap_std_error, "case1_fraction": sample.case1_fraction,
                    "gap_matches_expected": gap_matches,
                    "moments_within": report.all_within(), "seed": seed})
        ratio = density_ratio_histogram(sample.scaled)
        products = []
        if keep >= 2:
            products = [{"d": d, "indices": list(p.indices), "mean_product": p.mean_product,
                         "se_product": p.se_product, "mean_square_product": p.mean_square_product,
                         "se_square_product": p.se_square_product, "within": p.within()}
                        for p in product_moments(sample.columns, seed=seed)]
        return row, products, {"d": d, "max_density_ratio": ratio.max_ratio,
                               "density_ratio_holds": ratio.holds()}

    results = parallel_map(cell, params["d"], jobs)
    rows = [r[0] for r in results]
    tables: Dict[str, List[dict]] = {"moment_match": rows,
                                     "product_moments": [p for r in results for p in r[1]]}
    summary: Dict[str, Any] = {
        "acceptance_rates": {str(r["d"]): r["acceptance_rate"] for r in rows},
        "gap_mass": {str(r["d"]): r["gap_mass"] for r in rows},
        "expected_gap_mass": {str(r["d"]): r["expected_gap_mass"] for r in rows},
        "ks_statistic": {str(r["d"]): r["ks_statistic"] for r in rows},
        "moments_within": all(r["moments_within"] for r in rows),
        "density": [r[2] for r in results],
    }
    if params.get("ptf_d"):
        ptf = ptf_study(params["ptf_k"], params["ptf_d"], params["ptf_samples"], seed)
        tables["ptf_separation"] = [ptf]
        summary["ptf_gap"] = ptf["gap"]
        summary["ptf_consistent"] = ptf["consistent"]
    return RunResult(tables, summary)


@study("frames")
def frames(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """随机标架族的交叉范数；doubling 时比较 n 与 2n 的中位数"""
    m, n, N = params["m"], params["n"], params["n_frames"]
    dims = [n, 2 * n] if params.get("doubling") else [n]
    cells = [(dim, s) for dim in dims for s in range(params["seeds"])]

    def cell(item) -> dict:
        dim, s = item
        family = frame_family(m, dim, N, seed + s)
        return {"m": m, "n": dim, "N": N, "seed": seed + s,
                "max_cross_frobenius": family.max_cross_frobenius,
                "mean_cross_frobenius": family.mean_cross_frobenius,
                "median_cross_frobenius": family.median_cross_frobenius,
                "max_orthonormality_residual": family.max_orthonormality_residual}

    rows = parallel_map(cell, cells, jobs)
    medians = {dim: float(np.median([r["median_cross_frobenius"] for r in rows if r["n"] == dim]))
               for dim in dims}
    summary: Dict[str, Any] = {
        "max_cross_frobenius": max(r["max_cross_frobenius"] for r in rows),
        "max_orthonormality_residual": max(r["max_orthonormality_residual"] for r in rows),
        "median_cross_frobenius": {str(k): v for k, v in medians.items()},
    }
    if len(dims) == 2:
        summary["shrink_factor"] = medians[n] / medians[2 * n]
    return RunResult({"frames": rows}, summary)


@study("gns-scan")
def gns_scan(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """半空间交集的 GNS 扫描、单个半空间的闭式对照与随机 PTF 的量级检查"""
    ks = sorted(params["k"])
    eps = params["eps"]
    n_samples = params["n_samples"]
    rows = [row.to_row() for row in gns_intersection_scan(ks, eps, n_samples, seed)]

    sign = make_target("sign")

    def halfspace(rho: float) -> dict:
        estimate = gns_estimate(sign, rho, n_samples, seed)
        exact = halfspace_gns_closed_form(rho)
        return {"rho": rho, "gns": estimate.mean, "se": estimate.std_error, "closed_form": exact,
                "within": estimate.within(exact, SE_MULTIPLIER), "seed": seed}

    halfspace_rows = parallel_map(halfspace, params["rho"], jobs)
    sanity = ptf_gns_sanity(params["ptf_degree"], params["ptf_eps"], 5, min(n_samples, 100_000), seed)
    values = [r["gns"] for r in rows]
    summary = {
        "gns": {str(r["k"]): r["gns"] for r in rows},
        "increasing": all(a < b for a, b in zip(values, values[1:])),
        "ratio_last_first": values[-1] / values[0] if values[0] > 0 else float("inf"),
        "halfspace_within": all(r["within"] for r in halfspace_rows),
        "ptf_within": all(r["within"] for r in sanity),
    }
    return RunResult({"gns_scan": rows, "halfspace": halfspace_rows, "ptf_sanity": sanity}, summary)


def _identity_instance(seed: int, index: int) -> dict:
    rng = make_rng(seed, IDENTITY_STREAM, index)
    degree = int(rng.integers(2, 12))
    k = int(rng.choice([1, 3, 5, 7]))
    t = float(rng.uniform(0.05, 0.5))
    phi = float(rng.uniform(0.0, 2.0 * np.pi))
    p = TrigPolynomial.random_real(degree, seed + index)
    q = chebyshev_circle_interpolate(p, t, phi, k)
    bk = bk_identity_check(q, t, phi, k)
    filtering = filtering_identity_check(q, t, phi, k)
    derivative = derivative_bound_check(p, k)
    relative = abs(bk.b_k - bk.predicted) / max(abs(bk.predicted), 1e-300)
    return {"instance": index, "degree": degree, "k": k, "t": t, "phi": phi,
            "b_k": bk.b_k, "predicted": bk.predicted, "bk_relative_residual": relative,
            "bk_equal": bk.equal, "filtering_residual": filtering.residual,
            "filtering_holds": filtering.holds, "max_derivative": derivative.max_derivative,
            "derivative_bound": derivative.bound, "derivative_holds": derivative.holds}


@study("circle-check")
def circle_check(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """圆周系数恒等式与对称化不等式"""
    identities = parallel_map(lambda i: _identity_instance(seed, i), range(params["n_random"]), jobs)
    d = params["d"]
    p = best_l1(make_target("sign"), d).polynomial
    f = make_target("sign", dimension=params["dimension"])
    check = circle_symmetrization_check(f, p, d, params["n_circles"], seed, params["points"])
    residual = max(max(r["bk_relative_residual"], r["filtering_residual"]) for r in identities)
    row = check.to_row()
    row["residuals"] = residual
    summary = {
        "identities_hold": all(r["bk_equal"] and r["filtering_holds"] for r in identities),
        "derivative_bounds_hold": all(r["derivative_holds"] for r in identities),
        "max_residual": residual,
        "symmetrization_holds": check.holds,
        "lhs": check.lhs,
        "rhs": check.rhs,
    }
    return RunResult({"circle_check": [row], "identities": identities}, summary)


def _oracle_mode(params: Dict[str, Any], seed: int) -> OracleMode:
    if params.get("oracle") == "empirical":
        return OracleMode.empirical(params["oracle_samples"], seed)
    return OracleMode.analytic()


@study("plant-and-distinguish")
def plant_and_distinguish(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """植入见证后用回归学习器做区分

    每次试验在第 i 个标架上植入对偶见证，学习器在该标架坐标上回归；
    同时用低于 d 次的学习器记录拟合多项式与标签的相关性。
    布尔变体植入符号函数的见证；实值变体植入 real_target 的见证，
    标签放大 C = 1/E[f·g]。
    """
    d, n, m = params["d"], params["n"], params["m"]
    variant = params["variant"]
    if variant == "boolean":
        witness = dual_witness(make_target("sign"), d)
        C = 1.0
    else:
        report = dual_witness_real(make_target(params["real_target"]), d,
                                   params.get("epsilon") or REAL_WITNESS_EPSILON)
        if not report.feasible:
            raise DegenerateInputError(
                f"{params['real_target']} 在 d={d} 的见证相关性 {report.optimum:.4g} 低于 ε={report.epsilon:.4g}",
                {"optimum": report.optimum, "epsilon": report.epsilon})
        witness = report.witness
        C = 1.0 / witness.correlation
    epsilon = params.get("epsilon") or witness.correlation / 4.0
    low_degree = min(params["low_degree"], d - 1)
    family = frame_family(m, n, params["trials"], seed)
    mode = _oracle_mode(params, seed)
    adversary = Adversary(params["adversary"])
    kind = "l1" if variant == "boolean" else "l2"
    logger.info("植入实验：见证相关性 %.6f，ε=%.4f，C=%.4f，变体 %s", witness.correlation, epsilon, C, variant)

    def trial(i: int):
        frame = family.frames[i]
        planted = planted_distribution(witness, frame)
        oracle = StatOracle()
        instances = [
            ("planted", planted, params["learner_degree"], Verdict.PLANTED),
            ("null", NullDistribution(n), params["learner_degree"], Verdict.NULL),
            ("planted_low", planted, low_degree, None),
        ]
        rows = []
        for name, dist, degree, expected in instances:
            learner = LearnerConfig(kind, degree, params["n_samples"], frame)
            if variant == "boolean":
                result = distinguish_boolean(dist, epsilon, learner, seed + i, mode, adversary, oracle)
            else:
                result = distinguish_real(dist, C, learner, seed + i, None, mode, adversary, oracle)
            row = {"variant": variant, "instance": name, "m": m, "n": n, "d": d,
                   "witness_correlation": witness.correlation, "frame_id": i, "epsilon": epsilon,
                   "label_scale": C}
            row.update(result.to_row())
            row["expected"] = expected.value if expected else None
            row["correct"] = None if expected is None else result.verdict == expected
            if name == "planted_low":
                # 实值变体的相关性在放大后的标签上计算
                bound = SE_MULTIPLIER * result.polynomial_std_error + C * witness.continuous_residual
                row["low_degree_bound"] = bound
                row["low_degree_uncorrelated"] = abs(result.polynomial_correlation) <= bound
            rows.append(row)
        return rows, oracle.clamp_count

    results = parallel_map(trial, range(params["trials"]), jobs)
    rows = [row for trial_rows, _ in results for row in trial_rows]
    judged = [r for r in rows if r["correct"] is not None]
    low = [r for r in rows if r["instance"] == "planted_low"]
    summary = {
        "witness_correlation": witness.correlation,
        "continuous_residual": witness.continuous_residual,
        "epsilon": epsilon,
        "label_scale": C,
        "correct": sum(bool(r["correct"]) for r in judged),
        "judged": len(judged),
        "planted_correct": sum(bool(r["correct"]) for r in judged if r["instance"] == "planted"),
        "null_flagged": sum(r["verdict"] == Verdict.PLANTED.value for r in rows if r["instance"] == "null"),
        "low_degree_uncorrelated": all(r["low_degree_uncorrelated"] for r in low),
        "clamp_count": sum(count for _, count in results),
    }
    return RunResult({"plant_and_distinguish": rows}, summary)


@study("learner-bench")
def learner_bench(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """不同次数的回归学习器在植入与零分布上的测试误差"""
    witness = dual_witness(make_target(params["target"]), params["d"])
    frame = frame_family(1, params["n"], 1, seed).frames[0]
    dists = [("planted", planted_distribution(witness, frame)), ("null", NullDistribution(params["n"]))]
    cells = [(degree, name, dist) for degree in params["degrees"] for name, dist in dists]

    def cell(item) -> dict:
        degree, name, dist = item
        train = dist.sample(params["n_train"], seed)
        if params["learner"] == "l1":
            fitted = l1_regression(train, degree, frame)
        else:
            fitted = l2_regression(train, degree, frame)
        h = threshold_hypothesis(fitted, train)
        record = evaluate(h, dist, Metric.MISCLASSIFICATION, params["n_test"], seed + 1,
                          experiment_id=f"{name}-deg{degree}", learner_degree=degree)
        row = record.to_row()
        row["learner"] = params["learner"]
        row["excess"] = record.excess
        return row

    rows = parallel_map(cell, cells, jobs)
    summary = {
        "opt": witness.opt,
        "planted_error": {str(r["learner_degree"]): r["error"] for r in rows
                          if r["experiment_id"].startswith("planted")},
        "null_error": {str(r["learner_degree"]): r["error"] for r in rows
                       if r["experiment_id"].startswith("null")},
    }
    return RunResult({"learner_bench": rows}, summary)


def _frame_norm(G, frame, rule) -> float:
    """‖G(Vx)‖₂，x ~ N_n，按 Vx ~ N(0, VVᵀ) 做张量求积"""
    points, weights = tensor_points(rule, frame.m)
    factor = np.linalg.cholesky(frame.matrix @ frame.matrix.T)
    values = G.evaluate(points @ factor.T)
    return float(np.sqrt(np.sum(weights * values ** 2)))


@study("csq-bench")
def csq_bench(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """CSQ 困难函数族：范数、成对相关与查询下界"""
    target = make_target(params["target"])
    d, eps = params["d"], params["eps"]
    hard = csq_hard_function(target, d, eps, params["max_degree"])
    family = frame_family(params["m"], params["n"], params["frames"], seed)
    rule = gauss_hermite_rule(max(hard.G.stored_degree + 2, 64))
    squared = hard.G.l2_norm() ** 2

    norm_rows = []
    for i, frame in enumerate(family.frames):
        dist = PlantedReal(hard, frame)
        value = _frame_norm(dist.G, frame, rule)
        norm_rows.append({"frame_id": i, "norm": value, "expected": 2.0 / eps,
                          "deviation": abs(value - 2.0 / eps)})

    size = len(family)
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]

    def cell(pair) -> dict:
        i, j = pair
        check = correlation_bound_check(hard.G, family.frames[i], family.frames[j], d, seed=seed)
        row = {"i": i, "j": j}
        row.update(check.to_dict())
        return row

    pair_rows = parallel_map(cell, pairs, jobs)
    matrix = np.eye(size)
    for row in pair_rows:
        matrix[row["i"], row["j"]] = matrix[row["j"], row["i"]] = row["lhs"] / squared
    gamma = max((abs(r["lhs"]) / squared for r in pair_rows), default=0.0)
    estimate = None
    if gamma < 1.0:
        estimate = sq_dimension_estimate(matrix, gamma, 1.0).to_dict()
    else:
        logger.warning("成对相关 γ=%.4f 不小于 β=1，无法给出查询下界", gamma)

    real = dual_witness_real(target, d, eps)
    summary = {
        "scale": hard.scale,
        "tail_norm": hard.tail_norm,
        "max_norm_deviation": max(r["deviation"] for r in norm_rows),
        "pairs_hold": all(r["holds"] for r in pair_rows),
        "gamma": gamma,
        "sq_dimension": estimate,
        "real_witness_optimum": real.optimum,
        "real_witness_feasible": real.feasible,
        "real_norm_below_epsilon": real.norm_below_epsilon,
    }
    return RunResult({"csq_norms": norm_rows, "csq_pairs": pair_rows}, summary)
