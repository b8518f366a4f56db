from django.core.management.base import BaseCommand, CommandError

from coefficient_config import DEFAULT_SEARCH_BOX
from coefficient_search import SEARCH_MODES, TABLE1_LITERAL, SearchConfig, SearchFailure, find_coefficients
from errors import HetlabError
from hetlab.run_manifest import EXIT_SEARCH_EXHAUSTED, RunManifest, input_error, render
from ingestion_utils import dump_coefficients, load_box


class Command(BaseCommand):
    help = "Sample a coefficient box until a set passes the chosen conditions."
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--mode", choices=SEARCH_MODES, default=TABLE1_LITERAL)
        parser.add_argument("--box", help="box JSON file {key: [lower, upper]}; default is the built-in box")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--max", type=int, default=100_000, dest="max_samples")
        parser.add_argument("--workers", type=int, default=None, help="overrides HETLAB_THREADS")
        parser.add_argument("--out", help="also write the accepted set as a plain coefficient file")
        parser.add_argument("--no-timestamp", action="store_true")

    def handle(self, *args, **opts):
        try:
            box = load_box(opts["box"]) if opts["box"] else dict(DEFAULT_SEARCH_BOX)
            cfg = SearchConfig(
                mode=opts["mode"],
                box=box,
                max_samples=opts["max_samples"],
                rng_seed=opts["seed"],
                workers=opts["workers"],
            )
        except HetlabError as e:
            raise input_error(e) from e

        manifest = RunManifest.start("find_coeffs", timestamp=not opts["no_timestamp"],
                                     inputs={"box": opts["box"]}, config=cfg.to_dict(), seed=cfg.rng_seed)
        result = find_coefficients(cfg)

        if isinstance(result, SearchFailure):
            manifest.notes["status"] = "SearchFailure"
            self.stdout.write(render(manifest.finish(), result.to_dict()))
            raise CommandError(
                f"no accepted set in {result.samples} samples (most frequent failure: {result.dominant()})",
                returncode=EXIT_SEARCH_EXHAUSTED,
            )

        manifest.notes["status"] = "found"
        if opts["out"]:
            try:
                with open(opts["out"], "w", encoding="utf-8") as fh:
                    fh.write(dump_coefficients(result))
            except OSError as e:
                raise input_error(e) from e
        self.stdout.write(render(manifest.finish(), result.to_dict()))
