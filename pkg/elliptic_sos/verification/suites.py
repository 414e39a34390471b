"""
Seeded verification suites. Each check draws generic parameters, measures a residual and keeps the worst one;
a check passes when that worst residual stays below its tolerance (or above it, for quantities that must not
vanish).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from elliptic_sos.lattice import funceq
from elliptic_sos.lattice.algebra import (
    RELATIONS,
    REL_ABB,
    algebra_relation_residual,
    double_row_weight_residuals,
    monodromy_crossing_residual,
    monodromy_unitarity_residual,
    vacuum_annihilation_residual,
    vacuum_eigenvalues_closed,
    vacuum_eigenvalues_operator,
)
from elliptic_sos.lattice.partition import (
    ALT,
    COEFFICIENT,
    MAIN,
    crossing_factor,
    relative_deviation,
    z_algebraic,
    z_bar,
    z_closed_l1,
    z_contour,
    z_symmetrized,
)
from elliptic_sos.lattice.theta import EllipticContext, HigherOrderTheta, addition_rule_residual, classify_order_norm, eval_f, interpolate_theta, require_generic
from elliptic_sos.lattice.weights import LOCAL_IDENTITIES, local_identity_residual
from elliptic_sos.utils.sampling import DEFAULT_REGION, SamplingRegion, draw_complex, draw_generic, make_rng
from elliptic_sos.verification.draws import draw_model

logger = logging.getLogger('elliptic_sos.verification.suites')

UPPER = 'upper'
LOWER = 'lower'

DEFAULT_TOLERANCES = {
    'theta.oddness': 1e-12,
    'theta.quasiperiodicity': 1e-10,
    'theta.addition': 1e-10,
    'theta.zeros': 1e-12,
    'theta.trig_limit': 1e-12,
    'theta.fprime': 1e-8,
    'theta.interpolation': 1e-10,
    'weights.local': 1e-10,
    'algebra.relation': 1e-10,
    'algebra.vacuum': 1e-10,
    'algebra.vacuum_leak': 1e-11,
    'algebra.monodromy': 1e-10,
    'algebra.weights': 1e-12,
    'partition.routes': 1e-9,
    'partition.contour': 1e-6,
    'partition.closed_form': 1e-10,
    'partition.permutation': 1e-11,
    'partition.mu_symmetry': 1e-10,
    'partition.crossing': 1e-10,
    'partition.special_zeros': 1e-9,
    'partition.z_bar_order_norm': 1e-8,
    'funceq.residual': 1e-9,
    'funceq.swapped_det': 1e-8,
    'funceq.coefficient_m': 1e-10,
    'funceq.special_zero_det': 1e-8,
    'funceq.normalized_order_norm': 1e-8,
    'funceq.reconstruction': 1e-8,
    'funceq.proportionality': 1e-10,
    'funceq.reduced_residual': 1e-8,
    'funceq.reduced_det': 1e-8,
    'funceq.omega': 1e-10,
    'funceq.residue': funceq.RESIDUE_GROWTH_LIMIT,
    'funceq.residue_divergence': funceq.RESIDUE_GROWTH_LIMIT,
}

# ε-scan growth limits, not residual tolerances: --tol leaves them alone
GROWTH_LIMITS = frozenset({'funceq.residue', 'funceq.residue_divergence'})

TRIG_LIMIT_TAU = 40j
FINITE_DIFFERENCE_STEP = 1e-5
ZERO_NEARBY_OFFSET = 0.05
CONTOUR_CHECK_MAX_L = 2


@dataclass(frozen=True)
class CheckResult:
    name: str
    context: str
    draws: int
    worst: float
    tolerance: float
    bound: str = UPPER

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.worst):
            return False
        if self.bound == LOWER:
            return self.worst >= self.tolerance
        return self.worst <= self.tolerance


@dataclass
class SuiteReport:
    name: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


@dataclass(frozen=True)
class SuitePlan:
    contexts: Tuple[EllipticContext, ...]
    draws: int = 5
    max_l: int = 3
    trig_max_l: int = 4
    tolerance: Optional[float] = None
    contour: bool = True
    region: SamplingRegion = DEFAULT_REGION

    def sizes(self, ctx: EllipticContext, low: int = 1, high: Optional[int] = None) -> range:
        limit = self.trig_max_l if ctx.trigonometric else self.max_l
        if high is not None:
            limit = min(limit, high)
        return range(low, limit + 1)

    def tolerance_for(self, key: str, bound: str = UPPER) -> float:
        if self.tolerance is not None and bound == UPPER and key not in GROWTH_LIMITS:
            return self.tolerance
        return DEFAULT_TOLERANCES[key]


class _Suite:
    def __init__(self, name: str, plan: SuitePlan, rng: np.random.Generator):
        self.report = SuiteReport(name=name)
        self.plan = plan
        self.rng = rng

    def check(self, name: str, context: str, tolerance_key: str, measure: Callable[[np.random.Generator], float], draws: Optional[int] = None, bound=UPPER):
        draws = self.plan.draws if draws is None else draws
        values = [float(draw_generic(self.rng, measure)) for _ in range(draws)]
        values = [value if not math.isnan(value) else math.inf for value in values]
        worst = min(values) if bound == LOWER else max(values)
        result = CheckResult(
            name=f'{self.report.name}.{name}', context=context, draws=draws, worst=worst, tolerance=self.plan.tolerance_for(tolerance_key, bound), bound=bound
        )
        if result.passed:
            logger.debug(f"{result.name} [{context}] worst {worst:.3e}")
        else:
            logger.warning(f"{result.name} [{context}] failed: worst {worst:.3e} against {result.tolerance:.1e}")
        self.report.checks.append(result)
        return result

    def model_check(self, name: str, ctx: EllipticContext, L: int, tolerance_key: str, measure, extra: int = 0, bound=UPPER, draws=None):
        region = self.plan.region

        def run(rng):
            drawn = draw_model(rng, ctx, L, region, extra=extra)
            return measure(drawn)

        return self.check(name, f'{ctx.describe()} L={L}', tolerance_key, run, draws=draws, bound=bound)


def _relative(first: complex, second: complex) -> float:
    return relative_deviation(complex(first), complex(second))


def run_theta_suite(plan: SuitePlan, rng: np.random.Generator) -> SuiteReport:
    suite = _Suite('theta', plan, rng)
    region = plan.region
    for ctx in plan.contexts:
        label = ctx.describe()

        def oddness(rng, ctx=ctx):
            (lam,) = draw_complex(rng, 1, region)
            return abs(eval_f(ctx, lam) + eval_f(ctx, -lam)) / abs(eval_f(ctx, lam))

        def quasiperiodicity(rng, ctx=ctx):
            grid = draw_complex(rng, 6, region)
            return max(classify_order_norm(ctx, lambda lam: eval_f(ctx, lam), 1, 0, grid=grid))

        def addition(rng, ctx=ctx):
            return addition_rule_residual(ctx, *draw_complex(rng, 4, region))

        def zeros(rng, ctx=ctx):
            m = int(rng.integers(-2, 3))
            n = 0 if ctx.trigonometric else int(rng.integers(-1, 2))
            zero = 1j * np.pi * (m + (0 if ctx.trigonometric else n * ctx.tau))
            return abs(eval_f(ctx, zero)) / abs(eval_f(ctx, zero + ZERO_NEARBY_OFFSET))

        def fprime(rng, ctx=ctx):
            h = FINITE_DIFFERENCE_STEP
            return _relative((eval_f(ctx, h) - eval_f(ctx, -h)) / (2 * h), ctx.fprime0)

        def interpolation(rng, ctx=ctx):
            order = 3
            target = HigherOrderTheta(prefactor=1.0, zeros=draw_complex(rng, order, region))
            nodes = draw_complex(rng, order, region)
            values = [target.evaluate(ctx, node) for node in nodes]
            off_nodes = draw_complex(rng, 2, region)
            reproduced = max(_relative(interpolate_theta(ctx, order, target.norm, nodes, values, node), value) for node, value in zip(nodes, values))
            off_node = max(_relative(interpolate_theta(ctx, order, target.norm, nodes, values, lam), target.evaluate(ctx, lam)) for lam in off_nodes)
            return max(reproduced, off_node)

        suite.check('oddness', label, 'theta.oddness', oddness)
        suite.check('quasiperiodicity', label, 'theta.quasiperiodicity', quasiperiodicity)
        suite.check('addition', label, 'theta.addition', addition)
        suite.check('zeros', label, 'theta.zeros', zeros)
        suite.check('fprime', label, 'theta.fprime', fprime, draws=1)
        suite.check('interpolation', label, 'theta.interpolation', interpolation)

    nearly_trigonometric = EllipticContext(tau=TRIG_LIMIT_TAU)
    trigonometric = EllipticContext()

    def trig_limit(rng):
        (lam,) = draw_complex(rng, 1, region)
        return _relative(eval_f(nearly_trigonometric, lam), eval_f(trigonometric, lam))

    suite.check('trig_limit', nearly_trigonometric.describe(), 'theta.trig_limit', trig_limit)
    return suite.report


def run_weights_suite(plan: SuitePlan, rng: np.random.Generator) -> SuiteReport:
    suite = _Suite('weights', plan, rng)
    arity = {'DYBE': 3, 'UNITARITY': 1, 'CROSSING': 1, 'REFLECTION': 2}
    for ctx in plan.contexts:
        for kind in LOCAL_IDENTITIES:

            def measure(rng, ctx=ctx, kind=kind):
                gamma, theta, zeta = draw_complex(rng, 3, plan.region)
                lambdas = draw_complex(rng, arity[kind], plan.region)
                require_generic(ctx, np.array([gamma, theta, theta + gamma, theta - gamma]), "[gamma], [theta], [theta+-gamma]")
                return local_identity_residual(ctx, kind, gamma=gamma, theta=theta, lambdas=lambdas, zeta=zeta)

            suite.check(kind.lower(), ctx.describe(), 'weights.local', measure)
    return suite.report


def run_algebra_suite(plan: SuitePlan, rng: np.random.Generator) -> SuiteReport:
    suite = _Suite('algebra', plan, rng)
    for ctx in plan.contexts:
        for L in plan.sizes(ctx):
            for relation in RELATIONS:

                def relation_residual(drawn, relation=relation):
                    lam0, lam1 = drawn.extra
                    second = drawn.point if relation == REL_ABB else lam1
                    return algebra_relation_residual(drawn.model, relation, lam0, second)

                suite.model_check(relation.lower(), ctx, L, 'algebra.relation', relation_residual, extra=2)

            def vacuum(drawn):
                lam = drawn.extra[0]
                closed = vacuum_eigenvalues_closed(drawn.model, lam)
                operator, _ = vacuum_eigenvalues_operator(drawn.model, lam)
                return max(_relative(getattr(closed, name), getattr(operator, name)) for name in closed.__dataclass_fields__)

            def vacuum_leak(drawn):
                _, leak = vacuum_eigenvalues_operator(drawn.model, drawn.extra[0])
                return max(leak, vacuum_annihilation_residual(drawn.model, drawn.extra[0]))

            def monodromy(drawn):
                lam = drawn.extra[0]
                return max(monodromy_unitarity_residual(drawn.model, lam), monodromy_crossing_residual(drawn.model, lam))

            def weights(drawn):
                return max(double_row_weight_residuals(drawn.model, drawn.extra[0]).values())

            suite.model_check('vacuum_eigenvalues', ctx, L, 'algebra.vacuum', vacuum, extra=1)
            suite.model_check('vacuum_leak', ctx, L, 'algebra.vacuum_leak', vacuum_leak, extra=1)
            suite.model_check('monodromy', ctx, L, 'algebra.monodromy', monodromy, extra=1)
            suite.model_check('weight_conservation', ctx, L, 'algebra.weights', weights, extra=1)
    return suite.report


def _z_eval(model):
    return lambda point: z_algebraic(model, point)


def run_partition_suite(plan: SuitePlan, rng: np.random.Generator) -> SuiteReport:
    suite = _Suite('partition', plan, rng)
    for ctx in plan.contexts:
        for L in plan.sizes(ctx):

            def routes(drawn):
                model, point = drawn.model, drawn.point
                reference = z_algebraic(model, point)
                return max(_relative(reference, z_symmetrized(model, point, variant)) for variant in (MAIN, ALT, COEFFICIENT))

            def permutation(drawn):
                model, point = drawn.model, drawn.point
                return _relative(z_algebraic(model, point), z_algebraic(model, point[1:] + point[:1]))

            def mu_symmetry(drawn):
                model, point = drawn.model, drawn.point
                swapped = model.with_inhomogeneities(model.mu[::-1])
                return _relative(z_algebraic(model, point), z_algebraic(swapped, point))

            def crossing(drawn):
                model, point = drawn.model, drawn.point
                crossed = (-point[0] - model.gamma,) + point[1:]
                return _relative(z_algebraic(model, crossed), crossing_factor(model, point[0]) * z_algebraic(model, point))

            suite.model_check('routes', ctx, L, 'partition.routes', routes)
            suite.model_check('permutation_symmetry', ctx, L, 'partition.permutation', permutation)
            suite.model_check('mu_symmetry', ctx, L, 'partition.mu_symmetry', mu_symmetry)
            suite.model_check('crossing', ctx, L, 'partition.crossing', crossing)

        def closed_form(drawn):
            return _relative(z_closed_l1(drawn.model, drawn.point[0]), z_algebraic(drawn.model, drawn.point))

        suite.model_check('closed_form', ctx, 1, 'partition.closed_form', closed_form)

        if plan.contour:
            for L in plan.sizes(ctx, high=CONTOUR_CHECK_MAX_L):

                def contour(drawn):
                    return _relative(z_contour(drawn.model, drawn.point), z_algebraic(drawn.model, drawn.point))

                suite.model_check('contour', ctx, L, 'partition.contour', contour, draws=min(plan.draws, 2))

        for L in plan.sizes(ctx, low=2, high=3):

            def special_zeros(drawn):
                model = drawn.model
                return max(float(np.max(funceq.special_zero_scan(model, _z_eval(model), k, rest=drawn.point[: model.L - 2]))) for k in range(1, model.L + 1))

            suite.model_check('special_zeros', ctx, L, 'partition.special_zeros', special_zeros)

        for L in plan.sizes(ctx, high=3):

            def z_bar_order_norm(drawn):
                model, rest = drawn.model, drawn.point[1:]
                return max(classify_order_norm(ctx, lambda lam: z_bar(model, (lam,) + rest), 2 * (model.L + 1), (model.L - 1) * model.gamma))

            suite.model_check('z_bar_order_norm', ctx, L, 'partition.z_bar_order_norm', z_bar_order_norm, draws=min(plan.draws, 2))
    return suite.report


def run_funceq_suite(plan: SuitePlan, rng: np.random.Generator) -> SuiteReport:
    suite = _Suite('funceq', plan, rng)
    for ctx in plan.contexts:
        for L in plan.sizes(ctx):

            def residual(drawn):
                value, scale = funceq.fe_residual(drawn.model, drawn.extra[0], drawn.point, _z_eval(drawn.model))
                return value / scale

            def swapped_det(drawn):
                det, scale = funceq.swapped_matrix_det(drawn.model, drawn.extra[0], drawn.point)
                return abs(det) / scale

            def coefficient_m(drawn):
                return funceq.coefficient_m_residual(drawn.model, drawn.point)

            def omega(drawn):
                return max(funceq.omega_residual(drawn.model, drawn.point, route) for route in funceq.RECONSTRUCTION_ROUTES)

            def residue_scans(drawn):
                return [funceq.residue_scan(drawn.model, drawn.point, index) for index in range(1, drawn.model.L + 1)]

            def residue(drawn):
                return max(scan.growth for scan in residue_scans(drawn))

            def residue_divergence(drawn):
                return min(scan.divergence for scan in residue_scans(drawn))

            suite.model_check('residual', ctx, L, 'funceq.residual', residual, extra=1)
            suite.model_check('swapped_det', ctx, L, 'funceq.swapped_det', swapped_det, extra=1)
            suite.model_check('coefficient_m', ctx, L, 'funceq.coefficient_m', coefficient_m)
            suite.model_check('omega', ctx, L, 'funceq.omega', omega)
            suite.model_check('residue', ctx, L, 'funceq.residue', residue)
            suite.model_check('residue_divergence', ctx, L, 'funceq.residue_divergence', residue_divergence, bound=LOWER)

        for L in plan.sizes(ctx, low=2, high=3):

            def special_zero_det(drawn):
                det, scale = funceq.special_zero_matrix_det(drawn.model, drawn.extra[0], drawn.point[: drawn.model.L - 2], k=drawn.model.L)
                return abs(det) / scale

            def reconstruction(drawn):
                model, point = drawn.model, drawn.point
                return _relative(funceq.reconstruct_from_reduction(model, point, funceq.LAST), z_algebraic(model, point))

            def proportionality(drawn):
                model, lam0, rest = drawn.model, drawn.extra[0], drawn.point[:-1]
                minus = funceq.reduced_coefficients(model, lam0, rest, funceq.MINUS)
                plus = funceq.reduced_coefficients(model, lam0, rest, funceq.PLUS)
                return funceq.proportionality_spread(minus.M, plus.M)

            def reduced_residual(drawn):
                model = drawn.model
                reduced = funceq.reduced_model(model, funceq.LAST)
                value, scale = funceq.reduced_fe_residual(model, drawn.extra[0], drawn.point[:-1], _z_eval(reduced))
                return value / scale

            def reduced_det(drawn):
                det, scale = funceq.reduced_matrix_det(drawn.model, drawn.extra[0], drawn.point[:-1])
                return abs(det) / scale

            suite.model_check('special_zero_det', ctx, L, 'funceq.special_zero_det', special_zero_det, extra=1, bound=LOWER)
            suite.model_check('reconstruction', ctx, L, 'funceq.reconstruction', reconstruction)
            suite.model_check('proportionality', ctx, L, 'funceq.proportionality', proportionality, extra=1)
            suite.model_check('reduced_residual', ctx, L, 'funceq.reduced_residual', reduced_residual, extra=1)
            suite.model_check('reduced_det', ctx, L, 'funceq.reduced_det', reduced_det, extra=1)

        for L in plan.sizes(ctx, high=2):

            def normalized_order_norm(drawn):
                model, point = drawn.model, drawn.point
                gamma, theta, L = model.gamma, model.theta, model.L
                first = classify_order_norm(ctx, lambda lam: funceq.normalized_coefficients(model, lam, point)[0], 4 * L + 6, (L + 2) * gamma - theta)
                other = classify_order_norm(ctx, lambda lam: funceq.normalized_coefficients(model, lam, point)[1], 2 * L + 4, 3 * gamma - theta)
                return max(first + other)

            suite.model_check('normalized_order_norm', ctx, L, 'funceq.normalized_order_norm', normalized_order_norm, draws=1)
    return suite.report


SUITES: Dict[str, Callable[[SuitePlan, np.random.Generator], SuiteReport]] = {
    'theta': run_theta_suite,
    'weights': run_weights_suite,
    'algebra': run_algebra_suite,
    'partition': run_partition_suite,
    'funceq': run_funceq_suite,
}


def run_suites(names: Sequence[str], plan: SuitePlan, seed: int) -> List[SuiteReport]:
    """Run the named suites in a fixed order. Each suite has its own generator so selecting suites does not shift the draws of another."""
    reports = []
    for index, name in enumerate(SUITES):
        if name not in names:
            continue
        report = SUITES[name](plan, make_rng([seed, index]))
        failures = len(report.failures)
        logger.info(f"Suite {name}: {len(report.checks) - failures}/{len(report.checks)} checks passed")
        reports.append(report)
    return reports
