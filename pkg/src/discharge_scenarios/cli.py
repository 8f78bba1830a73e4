import argparse
import json
import logging
import os
import sys

import pandas as pd

from discharge_scenarios import __version__
from discharge_scenarios.checksum import calculate_checksum, calculate_directory_checksum
from discharge_scenarios.config import RunConfig
from discharge_scenarios.evaluation import (
    band_export,
    climatology_quantiles,
    coverage_density_pairs,
    coverage_table,
    energy_summary,
    historical_baseline,
    inflow_energy,
    load_productivity,
    scenario_band,
    write_coverage,
)
from discharge_scenarios.exceptions import ConfigError, DataError, NumericFault
from discharge_scenarios.ingest import (
    YearWindow,
    compute_norm_stats,
    load_discharge,
    load_ensemble,
    load_forcing,
    normalize,
    synth_ensemble,
    synth_generate,
    write_discharge,
    write_ensemble,
    write_forcing,
)
from discharge_scenarios.netcore import (
    Checkpoint,
    ModelConfig,
    forward,
    init_heads_from_history,
    init_model,
    load_checkpoint,
    save_checkpoint,
)
from discharge_scenarios.probloss import ln3_quantiles
from discharge_scenarios.scenario import (
    SerialModel,
    fit_serial_model,
    generate,
    load_scenarios,
    reorder,
    write_scenarios,
)
from discharge_scenarios.train import train

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


SERIAL_MODEL_FILE = "serial_model.json"
GROUND_TRUTH_FILE = "ground_truth.json"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class DischargeScenariosCLI:
    def __init__(self, args):
        self.logger = logging.getLogger(__name__)
        self.logger.debug("Parsing args: %s", str(args))
        self.args = self.parse_args(args)
        logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
        logging.basicConfig(level=self.args.loglevel, stream=sys.stdout, format=logformat, datefmt="%Y-%m-%d %H:%M:%S")

    def run_command(self):
        """
        parse_args() sets self.args.func to the subcommand's action function.
        Exceptions are mapped onto exit codes:

        0 = success
        2 = configuration error (bad config, invalid windows, bad spec)
        3 = data error (missing or malformed inputs, mismatched files)
        4 = numeric fault (training diverged, non-finite results)
        """
        try:
            self.config = RunConfig.load(self.args.config, seed=self.args.seed, no_reorder=getattr(self.args, "no_reorder", False))
            return self.args.func()
        except ConfigError as e:
            return self._fail("Configuration error", e, EXIT_CONFIG)
        except (DataError, OSError) as e:
            return self._fail("Data error", e, EXIT_DATA)
        except NumericFault as e:
            return self._fail("Numeric fault", e, EXIT_NUMERIC)

    def _fail(self, what, exc, code):
        self._error(f"{what}: {exc}")
        if self.args.loglevel != logging.DEBUG:
            self._note("You can use the --debug global flag to view the full traceback.")
        self.logger.debug(exc, exc_info=exc)
        return code

    def parse_args(self, args):
        """
        Parse command line parameters

        Args:
          args (List[str]): command line parameters as list of strings
              (for example  ``["--help"]``).

        Returns:
          :obj:`argparse.Namespace`: command line parameters namespace
        """

        parser = argparse.ArgumentParser(description="Probabilistic river discharge scenarios from climate forcing ensembles")
        parser.add_argument(
            "--version",
            action="version",
            version="discharge-scenarios {ver}".format(ver=__version__),
        )
        parser.add_argument(
            "--debug",
            help="Print a bunch of debug info",
            action="store_const",
            dest="loglevel",
            const=logging.DEBUG,
            default=logging.WARNING,
        )
        parser.add_argument(
            "--nocolor",
            help="Disable color output",
            required=False,
            dest="nocolor",
            default=True if len(os.environ.get("NO_COLOR", "")) else False,
            action="store_true",
        )

        shared = argparse.ArgumentParser(add_help=False)
        shared.add_argument(
            "--config",
            help="The JSON run configuration",
            required=True,
            metavar="CONFIG",
            dest="config",
        )
        shared.add_argument(
            "--seed",
            help="Override the configuration's seed",
            required=False,
            type=int,
            metavar="SEED",
            dest="seed",
            default=None,
        )

        commands = parser.add_subparsers(required=True, dest="command", metavar="COMMAND")

        cmd_synth = commands.add_parser("synth", parents=[shared], help="Write a synthetic basin (forcing, discharge, ground truth, ensemble)")
        cmd_synth.set_defaults(func=self.synth)

        cmd_train = commands.add_parser("train", parents=[shared], help="Train a model and write its checkpoint and training report")
        cmd_train.set_defaults(func=self.train)

        cmd_generate = commands.add_parser("generate", parents=[shared], help="Sample discharge scenarios for every ensemble trajectory")
        cmd_generate.set_defaults(func=self.generate)
        cmd_generate.add_argument(
            "--no-reorder",
            help="Skip the serial-correlation reordering of scenarios",
            required=False,
            dest="no_reorder",
            default=False,
            action="store_true",
        )

        cmd_report = commands.add_parser("report", parents=[shared], help="Write coverage, inflow energy and band reports")
        cmd_report.set_defaults(func=self.report)

        return parser.parse_args(args)

    def _error(self, msg):
        if self.args.nocolor:
            print(f"[ERROR] {msg}", file=sys.stderr)
        else:
            print(f"[\033[91mERROR\033[0m] {msg}", file=sys.stderr)

    def _ok(self, msg):
        if self.args.nocolor:
            print(f"[OK   ] {msg}")
        else:
            print(f"[\033[92mOK   \033[0m] {msg}")

    def _note(self, msg):
        if self.args.nocolor:
            print(f"[NOTE ] {msg}")
        else:
            print(f"[\033[94mNOTE \033[0m] {msg}")

    def _warn(self, msg):
        if self.args.nocolor:
            print(f"[WARN ] {msg}")
        else:
            print(f"[\033[93mWARN \033[0m] {msg}")

    def _prepare_output(self, path):
        outdir = os.path.dirname(path)
        if len(outdir) > 0 and not os.path.isdir(outdir):
            self.logger.info("Creating output directory: %s", outdir)
            os.makedirs(outdir)

    def _require(self, path, what, hint):
        if path is None or not os.path.exists(path):
            self._note(hint)
            raise DataError(f"{what} not found: {path}")

    def _load_basin(self):
        paths = self.config.paths
        self._require(paths.forcing, "forcing file", "Set paths.forcing, or run the synth subcommand to create a synthetic basin.")
        self._require(paths.history, "discharge file", "Set paths.history, or run the synth subcommand to create a synthetic basin.")
        forcing = load_forcing(paths.forcing)
        history = load_discharge(paths.history)
        history.check_aligned(forcing)
        return forcing, history

    def _load_checkpoint(self):
        path = self.config.paths.checkpoint
        self._require(path, "checkpoint", "Run the train subcommand first, or point paths.checkpoint at an existing checkpoint.")
        return load_checkpoint(path)

    def synth(self):
        spec = self.config.synth
        if spec is None:
            raise ConfigError("the configuration has no synth section")
        paths = self.config.paths
        forcing, history, truth = synth_generate(spec, self.config.seed)
        for path in (paths.forcing, paths.history, paths.output_file(GROUND_TRUTH_FILE)):
            self._prepare_output(path)
        write_forcing(forcing, paths.forcing)
        write_discharge(history, paths.history)
        truth.write(paths.output_file(GROUND_TRUTH_FILE))
        self._ok(f"Wrote {forcing.n_months} months of forcing to {paths.forcing}")
        self._ok(f"Wrote discharge for {history.n_plants} plants to {paths.history}")
        self._ok(f"Wrote ground truth to {paths.output_file(GROUND_TRUTH_FILE)}")

        ens = self.config.synth_ensemble
        if ens is not None:
            start = ens.start
            if start is None:
                year, month = forcing.months[-1]
                start = [year + month // 12, month % 12 + 1]
            ensemble = synth_ensemble(spec, self.config.seed, ens.n_traj, ens.horizon, start)
            write_ensemble(ensemble, paths.ensemble)
            self._ok(f"Wrote {len(ensemble)} ensemble trajectories of {ensemble.horizon} months to {paths.ensemble}")
        return EXIT_OK

    def train(self):
        cfg = self.config.train_config()
        forcing, history = self._load_basin()
        stats = compute_norm_stats(forcing, cfg.train_window)
        normalized = normalize(forcing, stats)

        model_config = ModelConfig(
            n_precip_cells=forcing.n_cells,
            n_temp_cells=forcing.n_cells,
            n_plants=history.n_plants,
            **self.config.model,
        )
        params = init_model(model_config, self.config.seed)
        params = init_heads_from_history(params, history, cfg.train_window)
        best, report = train(params, normalized, history, cfg)

        paths = self.config.paths
        checkpoint = Checkpoint(best, history.plants, forcing.mask, stats)
        self._prepare_output(paths.checkpoint)
        save_checkpoint(checkpoint, paths.checkpoint)
        report_path = paths.output_file("train_report.csv")
        self._prepare_output(report_path)
        report.write_csv(report_path)

        if report.stopped_early:
            self._note(f"Early stopping after epoch {report.epochs[-1].epoch}")
        self._ok(f"Selected epoch {report.selected_epoch} (validation loss {report.selected.valid_loss:.6g})")
        self._ok(f"Wrote checkpoint to {paths.checkpoint}")
        self._ok(f"Wrote training report to {report_path}")
        return EXIT_OK

    def _serial_model(self, checkpoint, checkpoint_id):
        """Fit the serial model, or reuse the one cached for this checkpoint."""
        cache = self.config.paths.output_file(SERIAL_MODEL_FILE)
        gen = self.config.generate
        key = {"checkpoint": checkpoint_id, "shrinkage": gen.shrinkage, "diagonal": gen.diagonal}
        if os.path.exists(cache):
            with open(cache, "r") as f:
                cached = json.load(f)
            if cached.get("key") == key:
                self.logger.info("Reusing serial model from %s", cache)
                return SerialModel.from_dict(cached["model"])

        cfg = self.config.train_config()
        forcing, history = self._load_basin()
        normalized = normalize(forcing, checkpoint.norm_stats)
        sm = fit_serial_model(checkpoint.params, normalized, history, cfg.train_window, shrinkage=gen.shrinkage, diagonal=gen.diagonal)
        self._prepare_output(cache)
        with open(cache, "w") as f:
            json.dump({"key": key, "model": sm.to_dict()}, f, indent=1)
            f.write("\n")
        return sm

    def generate(self):
        paths = self.config.paths
        gen = self.config.generate
        checkpoint = self._load_checkpoint()
        self._require(paths.ensemble, "ensemble directory", "Point paths.ensemble at a directory of traj_NNN.csv files and a manifest.json.")
        ensemble = load_ensemble(paths.ensemble, grid_shape=checkpoint.grid_shape)

        self._require(paths.forcing, "forcing file", "Set paths.forcing to the historical record the ensemble continues.")
        record = load_forcing(paths.forcing)
        scenarios, hidden = generate(checkpoint, ensemble, gen.n_scen, self.config.seed, workers=gen.workers, spinup=record)
        checkpoint_id = calculate_checksum(paths.checkpoint)
        if gen.reorder:
            sm = self._serial_model(checkpoint, checkpoint_id)
            scenarios = reorder(scenarios, hidden, sm, workers=gen.workers)
        else:
            self._note("Scenario reordering disabled")
        scenarios.provenance.update(
            {
                "checkpoint_sha256": checkpoint_id,
                "ensemble_sha256": calculate_directory_checksum(paths.ensemble),
            }
        )
        if scenarios.provenance.get("clipped"):
            self._warn(f"{scenarios.provenance['clipped']} scenario values were raised to the discharge floor")
        self._prepare_output(paths.scenarios)
        write_scenarios(scenarios, paths.scenarios)
        self._ok(f"Wrote {scenarios.values.size} scenario rows ({scenarios.n_traj} trajectories x {scenarios.n_scen} scenarios) to {paths.scenarios}")
        return EXIT_OK

    def _energy_reports(self, history, scenarios, window):
        paths = self.config.paths
        productivity = load_productivity(paths.productivity)
        groups = [None] + productivity.subsystem_names()
        history_frames = []
        scenario_frames = []
        for group in groups:
            name = "SYSTEM" if group is None else group
            baseline = historical_baseline(history, productivity, window=window, subsystem=group)
            frame = inflow_energy(history, productivity, baseline=baseline, subsystem=group)
            frame.insert(0, "subsystem", name)
            history_frames.append(frame)
            if scenarios is not None:
                summary = energy_summary(inflow_energy(scenarios, productivity, baseline=baseline, subsystem=group), self.config.report.energy_levels)
                summary.insert(0, "subsystem", name)
                scenario_frames.append(summary)
        written = [paths.output_file("inflow_energy_history.csv")]
        _concat(history_frames).to_csv(written[0], index=False, float_format="%.6g", lineterminator="\n")
        if scenario_frames:
            written.append(paths.output_file("inflow_energy_scenarios.csv"))
            _concat(scenario_frames).to_csv(written[1], index=False, float_format="%.6g", lineterminator="\n")
        return written

    def report(self):
        paths = self.config.paths
        cfg = self.config.train_config()
        qs = self.config.quantiles
        checkpoint = self._load_checkpoint()
        forcing, history = self._load_basin()
        if list(history.plants) != checkpoint.plants:
            raise DataError("discharge history plants do not match the checkpoint's plants")
        normalized = normalize(forcing, checkpoint.norm_stats)
        os.makedirs(paths.output, exist_ok=True)

        reports = {
            "train": coverage_table(checkpoint.params, normalized, history, cfg.train_window, qs),
            "valid": coverage_table(checkpoint.params, normalized, history, cfg.valid_window, qs),
        }
        coverage_path = paths.output_file("coverage.csv")
        write_coverage(reports, coverage_path)
        density = _concat([coverage_density_pairs(r, history).assign(window=name) for name, r in reports.items()])
        density.to_csv(paths.output_file("coverage_density.csv"), index=False, float_format="%.6g", lineterminator="\n")
        for name, r in reports.items():
            for plant, row in zip(r.plants, r.observed()):
                self._note(f"{plant} {name}: mid {row[0]:.1f}% below {row[1]:.1f}% above {row[2]:.1f}% (reference {r.reference[0]:g}/{r.reference[1]:g}/{r.reference[2]:g})")
        self._ok(f"Wrote coverage table to {coverage_path}")

        if self.config.report.charts:
            window = {"train": cfg.train_window, "valid": cfg.valid_window}.get(self.config.report.band_window)
            if window is None:
                window = YearWindow(cfg.train_window.start_year, cfg.valid_window.end_year)
            i0, i1 = window.indices(history.months)
            dist, _ = forward(checkpoint.params, normalized.slice(0, i1))
            months = history.months[i0:i1]
            climatology = climatology_quantiles(history, cfg.train_window, qs.levels, months)
            band_dir = paths.output_file("bands")
            written = band_export(
                ln3_quantiles(dist.slice(i0, i1), qs), months, history.plants, qs.levels, band_dir, observed=history.values[i0:i1], climatology=climatology
            )
            self._ok(f"Wrote {len(written)} band files to {band_dir}")

        scenarios = None
        if os.path.exists(paths.scenarios):
            scenarios = load_scenarios(paths.scenarios)
            if self.config.report.charts:
                climatology = climatology_quantiles(history, cfg.train_window, qs.levels, scenarios.months)
                band_dir = paths.output_file("bands")
                written = band_export(
                    scenario_band(scenarios, qs.levels), scenarios.months, scenarios.plants, qs.levels, band_dir, climatology=climatology, prefix="scenario_band"
                )
                self._ok(f"Wrote {len(written)} scenario band files to {band_dir}")
        else:
            self._note(f"No scenarios at {paths.scenarios}; run generate to include them")

        if paths.productivity is not None:
            for path in self._energy_reports(history, scenarios, cfg.train_window):
                self._ok(f"Wrote inflow energy to {path}")
        else:
            self._note("No productivity table configured; inflow energy skipped")
        return EXIT_OK


def _concat(frames):
    return pd.concat(frames, ignore_index=True)


def main(args):
    cli = DischargeScenariosCLI(args)
    cli.logger.debug("Running requested command/passing to function")
    exitcode = cli.run_command()
    cli.logger.info("Script ends here, rc=%d", exitcode)
    return exitcode


def run():
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`

    This function can be used as entry point to create console scripts with setuptools.
    """
    return main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(run())
