import logging
import time
from dataclasses import dataclass, field
from math import factorial
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from config.experiment import SCHEMAS
from approx import best_l1
from frames import frame_family
from hermite import (
    HermiteExpansion,
    expand,
    harmonic_inner_product,
    hermite_table,
    hypercontractive_chain,
    multi_indices,
)
from instances import correlation_bound_check
from moment_match import gaussian_moment
from noise import structural_inequality_check
from quadrature import expect, gauss_hermite_rule, make_rng, tensor_expect
from targets import make_target
from . import studies
from .runner import RunResult, study

logger = logging.getLogger(__name__)

# 随机带通多项式与性质检验使用的随机流
BANDPASS_STREAM = 12
PROPERTY_STREAM = 13


@dataclass
class CheckOutcome:
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)


def defaults(subcommand: str, **overrides) -> Dict[str, Any]:
    """子命令的默认参数，再覆盖给定项"""
    params = {key: (list(p.default) if isinstance(p.default, list) else p.default)
              for key, p in SCHEMAS[subcommand].items()}
    params.update(overrides)
    return params


def scaled(n: int, scale: float, minimum: int) -> int:
    return max(minimum, int(round(n * scale)))


def band(width: float, scale: float) -> float:
    """固定宽度的容差随样本量缩小而按 1/√scale 放宽"""
    return width / np.sqrt(min(scale, 1.0)) if scale > 0 else float("inf")


def check_duality(scale: float, seed: int, jobs: int) -> CheckOutcome:
    result = studies.duality(defaults("duality"), seed, jobs)
    return CheckOutcome(result.summary["max_gap"] <= 1e-6, {"max_gap": result.summary["max_gap"]})


def check_sign_scaling(scale: float, seed: int, jobs: int) -> CheckOutcome:
    result = studies.degree_scan(defaults("degree-scan"), seed, jobs)
    slope = result.summary.get("loglog_slope")
    passed = slope is not None and -2.4 <= slope <= -1.6
    return CheckOutcome(passed, {"loglog_slope": slope, "degrees": result.summary["degrees"]})


def check_relu_scaling(scale: float, seed: int, jobs: int) -> CheckOutcome:
    eps = [0.2, 0.1, 0.05, 0.025, 0.0125]
    l2 = studies.degree_scan(defaults("degree-scan", target="relu", norm="L2", eps=eps), seed, jobs)
    l1 = studies.degree_scan(defaults("degree-scan", target="relu", norm="L1", eps=eps), seed, jobs)
    s2, s1 = l2.summary.get("loglog_slope"), l1.summary.get("loglog_slope")
    passed = (s2 is not None and -1.6 <= s2 <= -1.1) and (s1 is not None and -1.3 <= s1 <= -0.75)
    return CheckOutcome(passed, {"l2_slope": s2, "l1_slope": s1,
                                 "l2_degrees": l2.summary["degrees"], "l1_degrees": l1.summary["degrees"]})


def check_sigmoid(scale: float, seed: int, jobs: int) -> CheckOutcome:
    eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    l2 = studies.degree_scan(defaults("degree-scan", target="sigmoid", norm="L2", eps=eps), seed, jobs)
    r_squared = l2.summary.get("log2_r_squared")
    e = expand(make_target("sigmoid"), 1, 4, gauss_hermite_rule(200))
    coefficients_ok = (abs(e.coefficient(0) - 0.5) <= 1e-8 and abs(e.coefficient(2)) <= 1e-8
                       and abs(e.coefficient(4)) <= 1e-8)
    l1_eps = [1e-1, 3e-2, 1e-2]
    l1 = studies.degree_scan(defaults("degree-scan", target="sigmoid", norm="L1", eps=l1_eps), seed, jobs)
    l1_degrees = l1.summary["degrees"]
    monotone = all(a <= b for a, b in zip(l1_degrees, l1_degrees[1:]))
    passed = (r_squared is not None and r_squared >= 0.9) and coefficients_ok and monotone \
        and l1_degrees[-1] >= 2
    return CheckOutcome(passed, {"log2_r_squared": r_squared, "coefficients_ok": coefficients_ok,
                                 "l2_degrees": l2.summary["degrees"], "l1_degrees": l1_degrees})


def check_moment_matching(scale: float, seed: int, jobs: int) -> CheckOutcome:
    n = scaled(1_000_000, scale, 20_000)
    result = studies.moment_match(defaults("moment-match", d=[4, 8, 16], n_samples=n, ptf_d=0), seed, jobs)
    rows = {row["d"]: row for row in result.tables["moment_match"]}
    rate = rows[8]["acceptance_rate"]
    expected = [rows[d]["expected_gap_mass"] for d in (4, 8, 16)]
    expected_decreasing = all(a > b for a, b in zip(expected, expected[1:]))
    # t = ⌈d/c⌉ + 1 时 Pr[Bin(t, c) ≤ d] 停在 ½ 附近，0.05 的间隙质量达不到
    strict_threshold_met = rows[8]["gap_mass"] <= 0.05 and rows[16]["gap_mass"] < rows[8]["gap_mass"]
    ks_bound = band(0.0025, scale)
    passed = (abs(rate - 0.5) <= band(0.002, scale) and rows[8]["moments_within"]
              and all(rows[d]["gap_matches_expected"] for d in rows) and expected_decreasing
              and rows[16]["gap_mass"] < rows[4]["gap_mass"] and rows[8]["ks_statistic"] <= ks_bound)
    return CheckOutcome(passed, {"acceptance_rate": rate, "moments_within": rows[8]["moments_within"],
                                 "gap_mass": {d: rows[d]["gap_mass"] for d in rows},
                                 "expected_gap_mass": {d: rows[d]["expected_gap_mass"] for d in rows},
                                 "ks_statistic_8": rows[8]["ks_statistic"],
                                 "strict_threshold_met": strict_threshold_met})


def check_ptf_separation(scale: float, seed: int, jobs: int) -> CheckOutcome:
    row = studies.ptf_study(4, 64, scaled(1_000_000, scale, 20_000), seed)
    passed = (row["gap"] > 3.0 * row["std_error"] and row["gap"] >= row["null_mean"] / 2.0
              and row["consistent"])
    detail = {k: row[k] for k in ("gap", "std_error", "null_mean", "continuous_l1_error", "grid_l1_error")}
    detail["strict_threshold_met"] = row["gap"] - 3.0 * row["std_error"] >= 0.05
    return CheckOutcome(passed, detail)


def check_frames(scale: float, seed: int, jobs: int) -> CheckOutcome:
    params = defaults("frames", seeds=scaled(30, scale, 5))
    summary = studies.frames(params, seed, jobs).summary
    shrink = summary["shrink_factor"]
    passed = (summary["max_orthonormality_residual"] <= 1e-10 and summary["max_cross_frobenius"] <= 0.5
              and 1.2 <= shrink <= 1.7)
    return CheckOutcome(passed, {"max_cross_frobenius": summary["max_cross_frobenius"],
                                 "max_residual": summary["max_orthonormality_residual"],
                                 "shrink_factor": shrink})


def _bandpass(seed: int) -> HermiteExpansion:
    rng = make_rng(seed, BANDPASS_STREAM)
    coefficients = {J: float(rng.standard_normal()) for J in multi_indices(2, 5)
                    if J.total_degree >= 4}
    return HermiteExpansion(2, 5, coefficients)


def check_correlation_lemma(scale: float, seed: int, jobs: int) -> CheckOutcome:
    pair = frame_family(1, 100, 2, seed)
    U, V = pair.frames
    g = HermiteExpansion.univariate([0.0, 0.0, 0.0, 0.0, 1.0])
    h4 = correlation_bound_check(g, U, V, 4, seed=seed)
    inner = float((U.matrix @ V.matrix.T)[0, 0])
    closed_form = abs(h4.lhs - inner ** 4) <= 5.0 * h4.lhs_std_error + 1e-10

    g2 = _bandpass(seed)
    family = frame_family(2, 100, 40, seed)
    checks = [correlation_bound_check(g2, family.frames[2 * i], family.frames[2 * i + 1], 4, seed=seed)
              for i in range(20)]
    passed = closed_form and all(c.holds for c in checks)
    return CheckOutcome(passed, {"h4_lhs": h4.lhs, "inner_fourth": inner ** 4,
                                 "bandpass_held": sum(c.holds for c in checks)})


def check_distinguisher(scale: float, seed: int, jobs: int) -> CheckOutcome:
    params = defaults("plant-and-distinguish", n_samples=scaled(20_000, scale, 2_000))
    summary = studies.plant_and_distinguish(params, seed, jobs).summary
    real_params = defaults("plant-and-distinguish", variant="real", d=2, trials=3,
                           n_samples=scaled(20_000, scale, 2_000))
    real = studies.plant_and_distinguish(real_params, seed, jobs)
    planted = [r for r in real.tables["plant_and_distinguish"] if r["instance"] == "planted"]
    # 解析模式下 truth 即 E[h(x)y]
    real_correlated = all(r["truth"] >= 1.0 / (6.0 * r["label_scale"]) for r in planted)
    passed = (summary["planted_correct"] == params["trials"] and summary["null_flagged"] == 0
              and summary["low_degree_uncorrelated"]
              and real.summary["planted_correct"] == real_params["trials"]
              and real.summary["null_flagged"] == 0 and real_correlated)
    detail = {k: summary[k] for k in ("planted_correct", "null_flagged", "low_degree_uncorrelated", "epsilon")}
    detail.update({"real_planted_correct": real.summary["planted_correct"],
                   "real_null_flagged": real.summary["null_flagged"],
                   "real_label_scale": real.summary["label_scale"],
                   "real_correlated": real_correlated})
    return CheckOutcome(passed, detail)


def check_gns(scale: float, seed: int, jobs: int) -> CheckOutcome:
    params = defaults("gns-scan", n_samples=scaled(1_000_000, scale, 20_000))
    summary = studies.gns_scan(params, seed, jobs).summary
    passed = summary["increasing"] and summary["ratio_last_first"] >= 1.3 and summary["halfspace_within"]
    return CheckOutcome(passed, {k: summary[k] for k in ("increasing", "ratio_last_first",
                                                         "halfspace_within")})


def check_structural(scale: float, seed: int, jobs: int) -> CheckOutcome:
    sign = make_target("sign")
    n = scaled(1_000_000, scale, 20_000)
    results = []
    for d in (2, 5, 10):
        p = best_l1(sign, d).polynomial
        for eps in (0.01, 0.05):
            check = structural_inequality_check(sign, p, eps, n, seed)
            results.append({"d": d, "epsilon": eps, "lhs": check.lhs, "rhs": check.rhs,
                            "holds": check.holds})
    return CheckOutcome(all(r["holds"] for r in results), {"cases": results})


def check_circle(scale: float, seed: int, jobs: int) -> CheckOutcome:
    summary = studies.circle_check(defaults("circle-check"), seed, jobs).summary
    passed = summary["identities_hold"] and summary["max_residual"] <= 1e-8 \
        and summary["symmetrization_holds"]
    return CheckOutcome(passed, {k: summary[k] for k in ("max_residual", "symmetrization_holds",
                                                         "lhs", "rhs")})


def check_csq(scale: float, seed: int, jobs: int) -> CheckOutcome:
    summary = studies.csq_bench(defaults("csq-bench"), seed, jobs).summary
    estimate = summary["sq_dimension"]
    passed = (summary["max_norm_deviation"] <= 1e-6 and summary["pairs_hold"]
              and estimate is not None and estimate["valid"])
    return CheckOutcome(passed, {"max_norm_deviation": summary["max_norm_deviation"],
                                 "gamma": summary["gamma"],
                                 "bound": None if estimate is None else estimate["bound"]})


def check_properties(scale: float, seed: int, jobs: int) -> CheckOutcome:
    detail: Dict[str, Any] = {}
    rule = gauss_hermite_rule(20)
    detail["quadrature_exact"] = all(
        abs(expect(rule, lambda x, j=j: x ** j) - gaussian_moment(j)) <= 1e-10 * max(1.0, gaussian_moment(j))
        for j in range(30))

    grid = gauss_hermite_rule(80)
    table = hermite_table(30, grid.nodes)
    gram = table.T @ (grid.weights[:, None] * table)
    detail["orthonormality_error"] = float(np.max(np.abs(gram - np.eye(31))))

    rng = make_rng(seed, PROPERTY_STREAM)
    p = HermiteExpansion(2, 6, {J: float(rng.standard_normal()) for J in multi_indices(2, 6)})
    quadrature_norm = tensor_expect(gauss_hermite_rule(12), 2, lambda x: p.evaluate(x) ** 2)
    detail["parseval_error"] = abs(quadrature_norm - p.l2_norm() ** 2)

    k = 3
    homogeneous = [J for J in multi_indices(3, k) if J.total_degree == k]
    a = HermiteExpansion(3, k, {J: float(rng.standard_normal()) for J in homogeneous})
    b = HermiteExpansion(3, k, {J: float(rng.standard_normal()) for J in homogeneous})
    expected = factorial(k) * sum(c * b.coefficient(J) for J, c in a.items())
    harmonic = harmonic_inner_product(a, b, k)
    detail["harmonic_error"] = abs(harmonic - expected) / max(1.0, abs(expected))

    norm_rule = gauss_hermite_rule(60)
    chains = [hypercontractive_chain(HermiteExpansion.univariate(rng.standard_normal(d + 1)), norm_rule)
              for d in range(1, 7)]
    detail["hypercontractive_holds"] = all(c.holds for c in chains)

    passed = (detail["quadrature_exact"] and detail["orthonormality_error"] <= 1e-12
              and detail["parseval_error"] <= 1e-9 * max(1.0, p.l2_norm() ** 2)
              and detail["harmonic_error"] <= 1e-8 and detail["hypercontractive_holds"])
    return CheckOutcome(passed, detail)


CHECKS: Dict[int, Tuple[str, Callable[[float, int, int], CheckOutcome]]] = {
    1: ("强对偶", check_duality),
    2: ("符号函数次数标度", check_sign_scaling),
    3: ("ReLU 次数标度", check_relu_scaling),
    4: ("Sigmoid", check_sigmoid),
    5: ("矩匹配", check_moment_matching),
    6: ("PTF 分离", check_ptf_separation),
    7: ("随机标架", check_frames),
    8: ("相关引理", check_correlation_lemma),
    9: ("区分器", check_distinguisher),
    10: ("噪声敏感度", check_gns),
    11: ("结构不等式", check_structural),
    12: ("圆周恒等式", check_circle),
    13: ("CSQ 困难族", check_csq),
    14: ("性质检验", check_properties),
}


def print_table(rows: List[Dict[str, Any]]):
    """打印验收结果表"""
    print("\n=== 验收结果 ===")
    print(f"{'编号':<6}{'检查':<16}{'结果':<8}{'耗时(s)':>10}")
    print("-" * 44)
    for row in rows:
        mark = "通过" if row["passed"] else "失败"
        print(f"{row['check']:<6}{row['name']:<16}{mark:<8}{row['runtime']:>10.1f}")
    print("-" * 44)
    print(f"通过 {sum(r['passed'] for r in rows)}/{len(rows)}")


@study("all-acceptance")
def all_acceptance(params: Dict[str, Any], seed: int, jobs: int) -> RunResult:
    """依次运行验收检查；scale 只缩放 Monte Carlo 样本量"""
    scale = params.get("scale") or 1.0
    rows = []
    details = {}
    for number in params["checks"]:
        if number not in CHECKS:
            logger.warning("未知的检查编号：%d", number)
            continue
        name, fn = CHECKS[number]
        logger.info("运行检查 %d：%s", number, name)
        start = time.perf_counter()
        outcome = fn(scale, seed, jobs)
        runtime = time.perf_counter() - start
        if not outcome.passed:
            logger.warning("检查 %d（%s）未通过：%s", number, name, outcome.detail)
        rows.append({"check": number, "name": name, "passed": outcome.passed, "runtime": runtime})
        details[str(number)] = outcome.detail
    print_table(rows)
    failed = [r["check"] for r in rows if not r["passed"]]
    summary = {"passed": not failed, "failed": failed, "scale": scale, "details": details}
    return RunResult({"acceptance": rows}, summary, passed=not failed)
