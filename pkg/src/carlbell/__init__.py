"""Sharp Bellman functions for the windowed Carleson embedding and John-Nirenberg.

Evaluators, derivative and foliation geometry, L^p versions, explicit
extremal sequences on the dyadic tree, and seeded verification suites.
"""
from .cet import (
    BellmanValue,
    CubicSolve,
    cubic_rhs,
    embedding_constant,
    eval_b,
    eval_bmax,
    eval_bmin,
    gradient,
    hessian_fd,
    kernel_direction,
    main_inequality_gap,
    solve_cubic,
)
from .domain import (
    L2,
    UNIT,
    Branch,
    CetPoint,
    Exponent,
    JniParams,
    JniPoint,
    Window,
    min_threshold,
    ratio_s,
    rescale_from_unit,
    rescale_to_unit,
)
from .errors import (
    BoundaryGradient,
    CarlbellError,
    DegeneratePoint,
    DepthTooSmall,
    DomainError,
    NoNegativeRoot,
    Nonconvergence,
    NoRealRoot,
    NotSuperharmonic,
    PoleError,
)
from .extremal import (
    CarlesonWeights,
    DyadicNode,
    ExtremalPlan,
    StepFunction,
    TreeFunction,
    build_extremal,
    carleson_sum,
    greens_gap,
    mix_along_line,
    solve_cn_dn,
)
from .foliation import FoliationFrame, extremal_line_point, recover_parameters, tangency_gap, upper_trace
from .jni import JniTangentLine, eval_jni, jni_a, jni_ma_residual, jni_tangent_line
from .lp import LpSolve, eval_lp, lp_rhs, solve_lp

__version__ = "0.1.0"
