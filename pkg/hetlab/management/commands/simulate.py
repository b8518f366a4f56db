from pathlib import Path

from django.core.management.base import BaseCommand

from errors import HetlabError
from hetlab.run_manifest import RunManifest, input_error, read_coefficients, render, save
from ingestion_utils import parse_state
from integrator import IntegratorConfig, integrate


class Command(BaseCommand):
    help = "Integrate one trajectory and write it as CSV (t,x1,x2,x3,x4)."
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--coeffs", required=True)
        parser.add_argument("--x0", default="0.1,0,0,0", help='initial state, e.g. "0.1,0,0,0"')
        parser.add_argument("--tmax", type=float, default=100.0)
        parser.add_argument("--out", help="CSV path; the manifest goes next to it as <out>.json")
        parser.add_argument("--no-timestamp", action="store_true")

    def handle(self, *args, **opts):
        coeffs = read_coefficients(opts["coeffs"])
        try:
            x0 = parse_state(opts["x0"])
            cfg = IntegratorConfig(max_time=opts["tmax"])
        except HetlabError as e:
            raise input_error(e) from e

        manifest = RunManifest.start(
            "simulate", timestamp=not opts["no_timestamp"],
            inputs={"coeffs": opts["coeffs"], "out": opts["out"]},
            config={"x0": [float(v) for v in x0], **cfg.to_dict()},
        )
        traj = integrate(coeffs, x0, cfg)
        manifest.notes["termination"] = traj.reason.value
        manifest.finish()

        summary = traj.summary()
        if opts["out"]:
            out = Path(opts["out"])
            out.parent.mkdir(parents=True, exist_ok=True)
            traj.to_csv(out)
            save(out.with_name(out.name + ".json"), manifest, summary)
            self.stdout.write(render(manifest, summary))
        else:
            self.stdout.write(traj.to_csv(), ending="")
