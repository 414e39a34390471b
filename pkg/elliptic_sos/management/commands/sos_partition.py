import json
import logging
from dataclasses import replace
from itertools import product
from sys import exit

try:
    from tabulate import tabulate

    HAS_TABULATE = True
except ImportError:
    HAS_TABULATE = False

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from elliptic_sos.exceptions import ContourTooLarge, DegenerateParameter, InvalidContext
from elliptic_sos.lattice.funceq import fe_residual
from elliptic_sos.lattice.partition import CONTOUR_ROUTE, MAIN, SYMMETRIZED_ROUTE, check_point, partition_report, relative_deviation, z_algebraic, z_bar, z_contour, z_symmetrized
from elliptic_sos.serializers.config import LatticeModelSerializer, RunConfigSerializer, sampling_region
from elliptic_sos.serializers.reports import PartitionReportSerializer, SuiteReportSerializer
from elliptic_sos.utils.sampling import draw_complex, draw_generic, make_rng
from elliptic_sos.utils.serialization import complex_to_pair, finite_or_none, jsonable, render_csv, render_json
from elliptic_sos.utils.settings import feature_enabled, get_elliptic_context, get_setting
from elliptic_sos.verification.suites import SuitePlan, run_suites

logger = logging.getLogger('elliptic_sos.management.commands.sos_partition')

EVAL = 'eval'
VERIFY = 'verify'
SCAN = 'scan'

CONFIG_ERROR = 2
DEGENERATE = 3
DISAGREEMENT = 4
SUITE_FAILURE = 5


class Command(BaseCommand):
    help = "Evaluate the SOS partition function with a reflecting end, run the verification suites or scan a parameter grid"

    def add_arguments(self, parser):
        parser.add_argument("action", choices=[EVAL, VERIFY, SCAN], help="eval: compare routes at one point, verify: run the suites, scan: tabulate over a grid")
        parser.add_argument("--config", help="Path to a JSON config document", required=False)
        parser.add_argument("--seed", type=int, help="Seed for every random draw, overrides sampling.seed", required=False)
        parser.add_argument("--out", help="Write the report here instead of stdout", required=False)
        parser.add_argument("--routes", help="Comma separated routes: a (algebraic), s (symmetrized), c (contour)", required=False)
        parser.add_argument("--suites", help="Comma separated suites: theta, weights, algebra, partition, funceq", required=False)
        parser.add_argument("--tol", type=float, help="Tolerance overriding every default", required=False)
        parser.add_argument("--draws", type=int, help="Random draws per verification check", required=False)
        parser.add_argument("--format", choices=["json", "csv"], help="Output format; scans default to csv, everything else is json", required=False)

    def handle(self, *args, **options):
        raw_config = self.load_config(options)
        serializer = RunConfigSerializer(data=raw_config)
        if not serializer.is_valid():
            raise CommandError(f"Invalid config: {json.dumps(serializer.errors)}", returncode=CONFIG_ERROR)
        config = serializer.validated_data
        action = options["action"]
        try:
            if action == EVAL:
                self.run_eval(raw_config, config, options)
            elif action == VERIFY:
                self.run_verify(raw_config, config, options)
            else:
                self.run_scan(raw_config, config, options)
        except DegenerateParameter as e:
            logger.error(f"Refusing non-generic input: {e}")
            raise CommandError(str(e), returncode=DEGENERATE)
        except InvalidContext as e:
            raise CommandError(f"Invalid config: {e}", returncode=CONFIG_ERROR)

    def load_config(self, options) -> dict:
        raw_config = {}
        if options["config"]:
            try:
                with open(options["config"]) as config_file:
                    raw_config = json.load(config_file)
            except OSError as e:
                raise CommandError(f"Unable to read config {options['config']}: {e}", returncode=CONFIG_ERROR)
            except json.JSONDecodeError as e:
                raise CommandError(f"Config {options['config']} is not valid JSON: {e}", returncode=CONFIG_ERROR)
            if not isinstance(raw_config, dict):
                raise CommandError("The config must be a JSON object", returncode=CONFIG_ERROR)
        for flag, key in [("routes", "routes"), ("suites", "suites"), ("tol", "tolerance"), ("draws", "draws")]:
            if options[flag] is not None:
                raw_config[key] = options[flag]
        if options["seed"] is not None:
            raw_config["sampling"] = {**(raw_config.get("sampling") or {}), "seed": options["seed"]}
        return raw_config

    def build_model(self, config):
        if config.get("model") is None:
            raise CommandError("This action needs a model section in the config", returncode=CONFIG_ERROR)
        return LatticeModelSerializer().create(config["model"])

    def base_point(self, model, config, strict):
        if config.get("point") is not None:
            return check_point(model, config["point"], strict=strict)
        region = sampling_region(config["sampling"])
        return draw_generic(make_rng(config["sampling"]["seed"]), lambda rng: check_point(model, draw_complex(rng, model.L, region), strict=True))

    def write_output(self, options, content: str):
        if options["out"]:
            with open(options["out"], "w") as out_file:
                out_file.write(content)
            logger.info(f"Wrote report to {options['out']}")
        else:
            self.stdout.write(content, ending='')

    def print_table(self, options, headers, rows):
        # the table only goes to stdout when the report itself does not
        if not options["out"]:
            return
        self.stdout.write('')
        if HAS_TABULATE:
            self.stdout.write(tabulate(rows, headers, tablefmt="github"))
        else:
            self.stdout.write("\t".join(headers))
            for row in rows:
                self.stdout.write("\t".join(str(cell) for cell in row))
        self.stdout.write('')

    def document(self, action, raw_config, config, **content):
        return {"command": action, "seed": config["sampling"]["seed"], "config": raw_config, **content}

    def run_eval(self, raw_config, config, options):
        model = self.build_model(config)
        point = self.base_point(model, config, strict=True)
        contour = config["contour"]
        report = partition_report(
            model,
            point,
            routes=config["routes"],
            contour_radius=contour["radius"],
            contour_nodes_count=contour["nodes"] or get_setting("CONTOUR_NODES"),
            radius_fraction=contour["radius_fraction"] or get_setting("CONTOUR_RADIUS_FRACTION"),
            max_l=get_setting("MAX_L"),
            contour_max_l=get_setting("CONTOUR_MAX_L"),
        )
        tolerance = config["tolerance"] or get_setting("ROUTE_TOLERANCE")
        disagreements = report.disagreements(tolerance)
        document = self.document(
            EVAL,
            raw_config,
            config,
            context=model.ctx.describe(),
            tolerance=tolerance,
            passed=not disagreements,
            disagreements=disagreements,
            report=PartitionReportSerializer(report).data,
        )
        self.write_output(options, render_json(document).decode())

        rows = [[name, f"{value.real!r}", f"{value.imag!r}", f"{report.timings.get(name, 0.0):.3f}"] for name, value in report.values.items()]
        self.print_table(options, ["Route", "Re Z", "Im Z", "Seconds"], rows)
        if disagreements:
            for pair, deviation in disagreements.items():
                self.stderr.write(f"Routes {pair} disagree: relative deviation {deviation:.3e} > {tolerance:.1e}")
            exit(DISAGREEMENT)

    def run_verify(self, raw_config, config, options):
        verify = config["verify"]
        contexts = [get_elliptic_context(tau) for tau in verify["taus"]]
        if verify["trigonometric"]:
            contexts.append(get_elliptic_context(None))
        plan = SuitePlan(
            contexts=tuple(contexts),
            draws=config["draws"],
            max_l=verify["max_l"],
            trig_max_l=verify["trig_max_l"],
            tolerance=config["tolerance"],
            contour=feature_enabled("CONTOUR"),
            region=sampling_region(config["sampling"]),
        )
        reports = run_suites(config["suites"], plan, config["sampling"]["seed"])
        passed = all(report.passed for report in reports)
        document = self.document(VERIFY, raw_config, config, passed=passed, suites=SuiteReportSerializer(reports, many=True).data)
        self.write_output(options, render_json(document).decode())

        rows = []
        for report in reports:
            for check in report.checks:
                rows.append([check.name, check.context, check.draws, f"{check.worst:.3e}", f"{check.tolerance:.1e}", "pass" if check.passed else "FAIL"])
        self.print_table(options, ["Check", "Context", "Draws", "Worst", "Tolerance", "Result"], rows)
        if not passed:
            failures = sum(len(report.failures) for report in reports)
            self.stderr.write(f"{failures} verification checks failed")
            exit(SUITE_FAILURE)

    def run_scan(self, raw_config, config, options):
        scan = config.get("scan")
        if scan is None:
            raise CommandError("The scan action needs a scan section in the config", returncode=CONFIG_ERROR)
        model = self.build_model(config)
        point = self.base_point(model, config, strict=False)
        axes = [axis for axis in (scan, scan.get("second")) if axis]
        grids = [np.linspace(axis["start"], axis["stop"], axis["num"]) for axis in axes]

        headers = ["index", "seed"]
        for axis in axes:
            label = f"lambda_{axis['index']}" if axis["parameter"] == "lambda" else axis["parameter"]
            headers += [f"{label}_re", f"{label}_im"]
        headers += ["z_re", "z_im", "abs_z", "z_bar_re", "z_bar_im", "abs_z_bar"] + [f"{name}_residual" for name in scan["residuals"]] + ["reason"]

        rows = []
        for index, values in enumerate(product(*grids)):
            row = [index, config["sampling"]["seed"]]
            for value in values:
                row += complex_to_pair(complex(value)) or [None, None]
            rows.append(row + self.scan_row(model, point, axes, values, scan))
        logger.info(f"Scanned {len(rows)} grid points, {sum(1 for row in rows if row[-1])} of them refused")

        if (options["format"] or "csv") == "csv":
            self.write_output(options, render_csv(headers, rows))
        else:
            records = [dict(zip(headers, row)) for row in rows]
            self.write_output(options, render_json(self.document(SCAN, raw_config, config, context=model.ctx.describe(), rows=records)).decode())
        self.print_table(options, ["Grid points", "Refused"], [[len(rows), sum(1 for row in rows if row[-1])]])

    def scan_row(self, model, point, axes, values, scan):
        n_residuals = len(scan["residuals"])
        try:
            model, point = self.apply_axes(model, point, axes, values)
            z_bar_value = z_bar(model, point)
        except (DegenerateParameter, ContourTooLarge) as e:
            return [None] * (6 + n_residuals) + [getattr(e, "guard", str(e))]
        # Z̄ stays finite at [θ+ζ+λ_i] = 0, where every route refuses Z
        z_bar_cells = self.complex_cells(z_bar_value)
        try:
            z_value = self.evaluate_route(model, point, scan["route"])
            residuals = []
            for name in scan["residuals"]:
                if name == "symmetry":
                    residuals.append(relative_deviation(z_value, self.evaluate_route(model, point[1:] + point[:1], scan["route"])))
                else:
                    residual, scale = fe_residual(model, scan["lam0"], point, lambda variables: z_algebraic(model, variables))
                    residuals.append(residual / scale if scale else None)
        except (DegenerateParameter, ContourTooLarge) as e:
            return [None] * 3 + z_bar_cells + [None] * n_residuals + [getattr(e, "guard", str(e))]
        return self.complex_cells(z_value) + z_bar_cells + jsonable(residuals) + [""]

    @staticmethod
    def complex_cells(value):
        pair = complex_to_pair(value) or [None, None]
        return jsonable(pair + [finite_or_none(abs(value))])

    def apply_axes(self, model, point, axes, values):
        point = list(point)
        for axis, value in zip(axes, values):
            value = complex(value)
            if axis["parameter"] == "lambda":
                point[axis["index"] - 1] = value
            else:
                model = replace(model, **{axis["parameter"]: value})
        return model, tuple(point)

    def evaluate_route(self, model, point, route):
        if route == SYMMETRIZED_ROUTE:
            return z_symmetrized(model, point, MAIN)
        if route == CONTOUR_ROUTE:
            return z_contour(model, point, n_nodes=get_setting("CONTOUR_NODES"), radius_fraction=get_setting("CONTOUR_RADIUS_FRACTION"))
        return z_algebraic(model, point)
