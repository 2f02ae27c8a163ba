from __future__ import annotations

import abc
import argparse
import csv
import inspect
import logging
import shutil
from pathlib import Path
from typing import Any

import numpy as np

from . import cli
from .config import Config, ConfigError, build_trial_config, read_trial_config
from .kernel import SeriesError, dunkl_kernel_bessel, dunkl_kernel_rank1, kernel_slice
from .report import VerificationReport, emit_report
from .suites import (
    SUITES,
    Baselines,
    ConfigValueError,
    HypothesisError,
    TrialConfig,
    freeze_baselines,
    replay_config,
    run_suite,
)
from .utils import format_constant, format_runtime

log = logging.getLogger(__name__)


COMMANDS: list[type[HdsCommand]] = []


def _float_list(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a list of numbers") from None


class HdsCommand(cli.Command, abc.ABC):
    def __init__(self, args: argparse.Namespace):
        super().__init__(args)
        self.args = args
        self.config = Config(load=True)

    @abc.abstractmethod
    def main(self) -> int:
        ...

    def __init_subclass__(cls, register: bool = True, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if register and not inspect.isabstract(cls):
            COMMANDS.append(cls)


class SuiteCommand(HdsCommand, register=False):
    """
    Run a verification suite and write its report
    """

    def load_trial_config(self) -> TrialConfig:
        overrides: dict[str, Any] = {
            "seed": self.args.seed,
            "threads": self.args.threads,
            "p": self.args.p,
            "q": self.args.q,
            "kappa": self.args.kappa,
        }
        path: Path | None = None
        values: dict[str, Any] = {}
        if self.args.replay is not None:
            try:
                values = replay_config(self.args.replay).as_dict()
            except (OSError, ValueError, KeyError) as e:
                raise ConfigError(f"cannot replay report: {e}", path=self.args.replay) from e
        if self.args.config is not None:
            path = self.args.config
            values.update(read_trial_config(path))
        if "threads" not in values and self.args.threads is None:
            overrides["threads"] = self.config.threads
        return build_trial_config(values, overrides, path)

    def baselines(self, fixtures: str) -> Baselines:
        path = Path(fixtures).expanduser() if fixtures else self.config.fixtures
        try:
            return Baselines(path)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot load fixtures: {e}", path=path) from e

    def print_report(self, report: VerificationReport) -> None:
        from texttable import Texttable

        termsize = shutil.get_terminal_size((80, 25))
        table = Texttable(max_width=termsize.columns)
        table.set_deco(Texttable.HEADER)
        table.set_cols_dtype(["t", "t", "t", "t"])
        table.set_cols_align(("l", "r", "r", "c"))
        table.add_row(("Trial", "Constant", "Bound", "Pass"))
        if self.args.verbose or self.args.debug:
            for t in report.per_trial:
                bound = "-" if t.bound is None else format_constant(t.bound)
                table.add_row((str(t.trial), format_constant(t.constant), bound, "yes" if t.passed else "NO"))
        bound = "-" if report.bound is None else format_constant(report.bound)
        table.add_row(("worst", format_constant(report.worst_case), bound, "yes" if report.passed else "NO"))
        print(table.draw())
        for key, value in sorted(report.summary.items()):
            if isinstance(value, float):
                value = format_constant(value)
            print(f"{key}: {value}")
        if report.runtime_ms is not None:
            print(f"runtime: {format_runtime(report.runtime_ms)}")

    def main(self) -> int:
        name = self.command_name()
        cfg = self.load_trial_config()
        _, uses_baselines = SUITES[name]
        baselines = self.baselines(cfg.fixtures) if uses_baselines else None

        try:
            report = run_suite(name, cfg, baselines)
        except HypothesisError as e:
            raise ConfigError(str(e)) from e
        except ConfigValueError as e:
            raise ConfigError(e.message, key=e.key) from e

        outdir = self.args.out if self.args.out is not None else self.config.output_dir
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            emit_report(report, outdir)
        except OSError as e:
            raise cli.Fail(f"{e.filename or outdir}: {e.strerror}") from e

        if self.args.freeze:
            if baselines is None:
                raise ConfigError(f"{name} has no baselines to freeze")
            for key in freeze_baselines(report, baselines):
                log.info("%s: baseline frozen for %s", name, key)
            baselines.save()

        self.print_report(report)
        if not report.passed:
            log.warning("%s: suite failed", name)
        return 0 if report.passed else 1

    @classmethod
    def add_subparser(cls, subparsers: argparse._SubParsersAction[Any]) -> argparse.ArgumentParser:
        parser = super().add_subparser(subparsers)
        parser.add_argument("--config", type=Path, metavar="PATH", help="suite configuration file")
        parser.add_argument("--replay", type=Path, metavar="REPORT", help="rerun with the configuration of a report")
        parser.add_argument("--seed", type=int, help="random seed")
        parser.add_argument("--out", type=Path, metavar="DIR", help="directory where reports are written")
        parser.add_argument("--threads", type=int, metavar="N", help="number of worker threads")
        parser.add_argument("--p", type=float, help="outer Lebesgue exponent")
        parser.add_argument("--q", type=float, help="inner ℓ^q exponent")
        parser.add_argument("--kappa", type=_float_list, help="multiplicities, comma separated")
        parser.add_argument("--freeze", action="store_true", help="store the worst cases as new baselines")
        return parser


class VerifyScalarHds(SuiteCommand):
    """
    Weak and strong maximal inequalities for random finite Markov semigroups
    """

    NAME = "verify-scalar-hds"


class VerifyVectorHds(SuiteCommand):
    """
    Componentwise maximal inequality in L^p(ℓ^q), for p <= q
    """

    NAME = "verify-vector-hds"


class VerifyBanachHds(SuiteCommand):
    """
    Maximal inequality for the ℓ^q norm of averages of vector fields
    """

    NAME = "verify-banach-hds"


class VerifyFs(SuiteCommand):
    """
    Fefferman-Stein inequality for the Hardy-Littlewood maximal function
    """

    NAME = "verify-fs"


class VerifyDunklFs(SuiteCommand):
    """
    Fefferman-Stein inequality for the Dunkl heat maximal function
    """

    NAME = "verify-dunkl-fs"


class CheckDomination(SuiteCommand):
    """
    Pointwise domination of ball maximal functions by heat maximal functions
    """

    NAME = "check-domination"


class ExploreConjecture(SuiteCommand):
    """
    Explore the weak L¹(ℓ^q) constant of the componentwise maximal function
    """

    NAME = "explore-conjecture"


class TransformCheck(SuiteCommand):
    """
    Plancherel, inversion and parity checks of the discrete Dunkl transform,
    with the negative part of a translated ball
    """

    NAME = "transform-check"


class HeatCheck(SuiteCommand):
    """
    Contraction, positivity, semigroup law and mass of the Dunkl heat semigroup
    """

    NAME = "heat-check"


class Kernel(HdsCommand):
    """
    Evaluate the rank one Dunkl kernel E_κ(x, y), or E_κ(ix, y)
    """

    def main(self) -> int:
        if self.args.kappa < 0:
            raise ConfigError("must be nonnegative", key="kappa")
        # E_κ(ix, y) = E_κ(x, iy)
        y = complex(0, self.args.y) if self.args.imaginary else complex(self.args.y)
        try:
            value = complex(dunkl_kernel_rank1(self.args.kappa, self.args.x, y))
        except SeriesError as e:
            if not self.args.imaginary:
                raise cli.Fail(str(e)) from e
            log.info("%s: using the Bessel closed form", e)
            value = complex(dunkl_kernel_bessel(self.args.kappa, self.args.x * self.args.y, imaginary=True))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.args.imaginary:
            print(f"{value.real:.15g} {value.imag:+.15g}i")
        else:
            print(f"{value.real:.15g}")

        if self.args.slice is not None:
            self.write_slice(self.args.slice)
        return 0

    def write_slice(self, path: Path) -> None:
        """
        Dump E_κ(ix, y) over a range of x as CSV
        """
        xs = np.linspace(-self.args.slice_range, self.args.slice_range, self.args.slice_points)
        values = kernel_slice(self.args.kappa, xs, complex(0, self.args.y))
        try:
            with path.open("wt", newline="") as fd:
                writer = csv.writer(fd, lineterminator="\n")
                writer.writerow(["x", "y", "Re E", "Im E"])
                for x, v in zip(xs, values):
                    writer.writerow([repr(float(x)), repr(float(self.args.y)), repr(v.real), repr(v.imag)])
        except OSError as e:
            raise cli.Fail(f"{path}: {e.strerror}") from e
        log.info("kernel slice written to %s", path)

    @classmethod
    def add_subparser(cls, subparsers: argparse._SubParsersAction[Any]) -> argparse.ArgumentParser:
        parser = super().add_subparser(subparsers)
        parser.add_argument("--kappa", type=float, required=True, help="multiplicity")
        parser.add_argument("--x", type=float, required=True, help="first argument")
        parser.add_argument("--y", type=float, required=True, help="second argument")
        parser.add_argument("--imaginary", action="store_true", help="evaluate E_κ(ix, y)")
        parser.add_argument("--slice", type=Path, metavar="CSV", help="also write E_κ(ix, y) for x in a range")
        parser.add_argument(
            "--slice-range", type=float, default=10.0, help="x range of the slice (default: %(default)s)"
        )
        parser.add_argument("--slice-points", type=int, default=201, help="samples in the slice (default: %(default)s)")
        return parser


class Completion(HdsCommand):
    """
    Tab completion support
    """

    def main(self) -> int:
        if self.args.subcommand == "commands":
            for c in COMMANDS:
                print(c.command_name())
        elif self.args.subcommand == "suites":
            for name in SUITES:
                print(name)
        else:
            raise cli.Fail("Usage: hds completion {commands|suites}")
        return 0

    @classmethod
    def add_subparser(cls, subparsers: argparse._SubParsersAction[Any]) -> argparse.ArgumentParser:
        parser = super().add_subparser(subparsers)
        parser.add_argument("subcommand", nargs="?", default=None, help="command for which to provide completion")
        return parser

