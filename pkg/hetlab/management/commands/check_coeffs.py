from django.core.management.base import BaseCommand, CommandError

from conditions import check_construction, full_report
from hetlab.run_manifest import EXIT_CONDITION_FAILURE, RunManifest, read_coefficients, render


class Command(BaseCommand):
    help = "Evaluate conditions C1-C18, construction items (i)-(iv) and the hypotheses for a coefficient file."
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--coeffs", required=True, help="coefficient JSON file")
        parser.add_argument("--no-timestamp", action="store_true", help="omit wall-clock fields")

    def handle(self, *args, **opts):
        coeffs = read_coefficients(opts["coeffs"])
        manifest = RunManifest.start("check_coeffs", timestamp=not opts["no_timestamp"],
                                     inputs={"coeffs": opts["coeffs"]})

        report = full_report(coeffs)
        construction = check_construction(coeffs)
        payload = report.to_dict()
        payload["construction"] = construction.to_dict()

        passed = report.table1_passed()
        manifest.notes["table1_pass"] = passed
        self.stdout.write(render(manifest.finish(), payload))

        if not passed:
            raise CommandError(f"Condition rows failing: {', '.join(report.failed_rows())}",
                               returncode=EXIT_CONDITION_FAILURE)
