"""In-process HiGHS through the ``highspy`` bindings (optional dependency)."""
from __future__ import annotations

import numpy as np


def highs_status(h) -> tuple[str, float | None, float | None, list | None]:
    """Status, objective, bound and column values of a solved ``highspy.Highs``."""
    import highspy
    S = highspy.HighsModelStatus
    ms = h.getModelStatus()
    info = h.getInfo()
    has_point = info.primal_solution_status == 2
    if ms == S.kOptimal:
        status = "optimal"
    elif ms == S.kInfeasible:
        status = "infeasible"
    elif ms in (S.kTimeLimit, S.kIterationLimit, S.kSolutionLimit, S.kInterrupt):
        status = "feasible" if has_point else "unknown"
    else:
        status = "error"
    if not (has_point and status in ("optimal", "feasible")):
        return status, None, None, None
    objective = info.objective_function_value
    bound = info.mip_dual_bound if info.mip_node_count >= 0 else objective
    if status == "optimal" and (bound is None or abs(bound) == float("inf")):
        bound = objective
    return status, objective, bound, list(h.getSolution().col_value)


class HighspyBackend:
    """Pass the model to HiGHS in memory; no files are written.

    ``presolve=None`` follows the model's hint (``presolve_setting``).
    """

    name = "highspy"

    def __init__(self, threads: int | None = None, presolve: bool | None = None):
        import highspy  # noqa: F401  fail early when the extra is missing
        self.threads = threads
        self.presolve = presolve

    def run(self, model, time_limit: float, workdir=None, gap=1e-6):
        import highspy
        from ..solve import RawResult, model_arrays, presolve_setting
        c, lb, ub, is_int, A, lo, hi = model_arrays(model)
        inf = highspy.kHighsInf
        lp = highspy.HighsLp()
        lp.num_col_ = len(c)
        lp.num_row_ = A.shape[0]
        lp.col_cost_ = c
        lp.col_lower_ = np.where(np.isinf(lb), -inf, lb)
        lp.col_upper_ = np.where(np.isinf(ub), inf, ub)
        lp.row_lower_ = np.where(np.isinf(lo), -inf, lo)
        lp.row_upper_ = np.where(np.isinf(hi), inf, hi)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
        lp.a_matrix_.start_ = A.indptr
        lp.a_matrix_.index_ = A.indices
        lp.a_matrix_.value_ = A.data
        if is_int.any():
            kind = highspy.HighsVarType
            lp.integrality_ = [kind.kInteger if f else kind.kContinuous for f in is_int]
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("time_limit", float(time_limit))
        h.setOptionValue("mip_rel_gap", gap)
        h.setOptionValue("presolve", "on" if presolve_setting(model, self.presolve) else "off")
        if self.threads:
            h.setOptionValue("threads", self.threads)
        h.passModel(lp)
        h.run()
        status, objective, bound, cols = highs_status(h)
        values = None if cols is None else \
            {v.name: float(x) for v, x in zip(model.variables, cols)}
        return RawResult(status, objective, bound, values, h.modelStatusToString(h.getModelStatus()))
