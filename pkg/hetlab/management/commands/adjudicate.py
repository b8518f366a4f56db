import logging
import os

from django.conf import settings
from django.core.management.base import BaseCommand

from adjudication import BudgetConfig, adjudicate
from config import BASIN_EPS_LEVELS, BASIN_SAMPLES
from errors import HetlabError
from hetlab.run_manifest import RunManifest, input_error, prepare_output_dir, read_coefficients, render, save

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Run the whole pipeline for a coefficient file and write the reports to a directory."
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--coeffs", required=True)
        parser.add_argument("--out", default=None, help="report directory")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--eps", type=float, nargs="+", default=list(BASIN_EPS_LEVELS))
        parser.add_argument("--samples", type=int, default=BASIN_SAMPLES)
        parser.add_argument("--index-samples", type=int, default=0)
        parser.add_argument("--workers", type=int, default=None)
        parser.add_argument("--skip-basin", action="store_true")
        parser.add_argument("--no-timestamp", action="store_true")

    def handle(self, *args, **opts):
        coeffs = read_coefficients(opts["coeffs"])
        try:
            budget = BudgetConfig(
                eps_levels=tuple(opts["eps"]),
                samples=opts["samples"],
                seed=opts["seed"],
                skip_basin=opts["skip_basin"],
                workers=opts["workers"],
                index_samples=opts["index_samples"],
            )
        except HetlabError as e:
            raise input_error(e) from e

        out_dir = prepare_output_dir(opts["out"] or os.path.join(settings.HETLAB_OUTPUT_DIR, "adjudicate"))

        manifest = RunManifest.start(
            "adjudicate", timestamp=not opts["no_timestamp"],
            inputs={"coeffs": opts["coeffs"], "out": str(out_dir)},
            config=budget.to_dict(), seed=budget.seed,
        )
        report = adjudicate(coeffs, budget)
        manifest.notes["anomalies"] = len(report.anomalies)
        manifest.finish()

        full = report.to_dict()
        save(out_dir / "conditions.json", manifest, full["conditions"])
        save(out_dir / "construction.json", manifest, full["construction"])
        save(out_dir / "connections.json", manifest,
             {"connections": full["connections"], "unstable_fan": full["unstable_fan"]})
        save(out_dir / "basin.json", manifest,
             {"basin": full["basin"], "index_estimates": full["index_estimates"], "skipped": full["skipped"]})
        save(out_dir / "adjudication.json", manifest, full)
        logger.info("[Adjudicate] reports written to %s", out_dir)

        self.stdout.write(render(manifest, full))
